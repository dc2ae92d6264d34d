#include "geobound/lang.hpp"

namespace geobound {

StmtPtr unroll(const StmtPtr& stmt, std::size_t u) {
  return std::visit(
      [&](const auto& n) -> StmtPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Seq>) {
          return Statement::seq(unroll(n.first, u), unroll(n.second, u));
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          return Statement::ite(n.cond, unroll(n.then_branch, u), unroll(n.else_branch, u));
        } else if constexpr (std::is_same_v<T, While>) {
          const StmtPtr body = unroll(n.body, u);
          StmtPtr acc = Statement::loop(n.cond, body, n.loop_id);
          for (std::size_t v = 0; v < u; ++v) {
            acc = Statement::ite(n.cond, Statement::seq(body, acc), Statement::skip());
          }
          return acc;
        } else {
          return stmt;
        }
      },
      stmt->node);
}

CoreProgram unroll(const CoreProgram& program, std::size_t u) {
  CoreProgram out = program;
  out.body = unroll(program.body, u);
  return out;
}

}  // namespace geobound
