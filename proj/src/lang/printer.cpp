#include <sstream>

#include "geobound/lang.hpp"

namespace geobound {
namespace {

void print_event(std::ostream& os, const Event& e, const std::vector<std::string>& names) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarEq>) {
          os << names.at(n.var) << " = " << n.value;
        } else if constexpr (std::is_same_v<T, Flip>) {
          os << "flip(" << to_string(n.prob) << ")";
        } else if constexpr (std::is_same_v<T, Not>) {
          os << "!(";
          print_event(os, *n.inner, names);
          os << ")";
        } else {
          os << "(";
          print_event(os, *n.lhs, names);
          os << " && ";
          print_event(os, *n.rhs, names);
          os << ")";
        }
      },
      e.node);
}

void print_stmt(std::ostream& os, const StmtPtr& s, const std::vector<std::string>& names, int depth) {
  const std::string pad(2 * depth, ' ');
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Skip>) {
          os << pad << "skip;\n";
        } else if constexpr (std::is_same_v<T, Fail>) {
          os << pad << "fail;\n";
        } else if constexpr (std::is_same_v<T, Seq>) {
          print_stmt(os, n.first, names, depth);
          print_stmt(os, n.second, names, depth);
        } else if constexpr (std::is_same_v<T, SetZero>) {
          os << pad << names.at(n.var) << " := 0;\n";
        } else if constexpr (std::is_same_v<T, AddConst>) {
          os << pad << names.at(n.var) << " += " << n.amount << ";\n";
        } else if constexpr (std::is_same_v<T, DecClamped>) {
          os << pad << names.at(n.var) << " -= 1;\n";
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          os << pad << "if ";
          print_event(os, *n.cond, names);
          os << " {\n";
          print_stmt(os, n.then_branch, names, depth + 1);
          os << pad << "} else {\n";
          print_stmt(os, n.else_branch, names, depth + 1);
          os << pad << "}\n";
        } else {
          os << pad << "while ";
          print_event(os, *n.cond, names);
          os << " {\n";
          print_stmt(os, n.body, names, depth + 1);
          os << pad << "}\n";
        }
      },
      s->node);
}

}  // namespace

std::string print(const Event& event, const std::vector<std::string>& names) {
  std::ostringstream os;
  print_event(os, event, names);
  return os.str();
}

std::string print(const CoreProgram& program) {
  std::ostringstream os;
  print_stmt(os, program.body, program.var_names, 0);
  return os.str();
}

}  // namespace geobound
