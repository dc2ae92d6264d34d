#include "geobound/egd.hpp"

#include <sstream>
#include <stdexcept>

namespace geobound {
namespace {

RationalOps ops;

}  // namespace

Egd make_egd(Tensor<Rational> block, std::vector<Rational> decay) {
  if (block.rank() != decay.size()) throw std::invalid_argument("egd: block rank and decay count differ");
  for (std::size_t k = 0; k < block.rank(); ++k) {
    if (block.extent(k) == 0) throw std::invalid_argument("egd: empty block axis");
  }
  for (const auto& v : block.data()) {
    if (v < 0) throw std::invalid_argument("egd: negative block entry");
  }
  for (const auto& a : decay) {
    if (a < 0 || a >= 1) throw std::invalid_argument("egd: decay outside [0,1)");
  }
  return {std::move(block), std::move(decay)};
}

Egd egd_dirac(const std::vector<std::size_t>& point) {
  Shape shape(point.size());
  for (std::size_t k = 0; k < point.size(); ++k) shape[k] = point[k] + 1;
  Tensor<Rational> block(shape);
  block(point) = 1;
  return {std::move(block), std::vector<Rational>(point.size(), Rational(0))};
}

Rational mass_at(const Egd& g, std::span<const std::size_t> idx) { return egd_ops::entry_at(ops, g, idx); }

Egd expand(const Egd& g, const Shape& shape) {
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (shape[k] < g.block.extent(k)) throw std::invalid_argument("expand: target smaller than block");
  }
  return egd_ops::expand(ops, g, shape);
}

bool egd_le(const Egd& a, const Egd& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("egd_le: dimension mismatch");
  bool ok = true;
  egd_ops::for_each_le(ops, a, b, [&](const Rational& l, const Rational& r) { ok = ok && l <= r; });
  return ok;
}

Egd marginalize(const Egd& g, std::size_t k) { return egd_ops::marginalize(ops, g, k); }
Egd marginal_of(const Egd& g, std::size_t var) { return egd_ops::marginal_of(ops, g, var); }

Rational moment(const Egd& g1, std::size_t k) {
  if (g1.dims() != 1) throw std::invalid_argument("moment: expects a one-dimensional EGD");
  return egd_ops::moment(ops, g1, k);
}

Rational total_mass(const Egd& g) { return egd_ops::total_mass(ops, g); }

Egd join_strict(const Egd& a, const Egd& b) {
  return egd_ops::join(ops, a, b, [](const Rational& x, const Rational& y) { return x > y ? x : y; });
}

Egd restrict(const Egd& g, const Event& e) { return egd_ops::restrict(ops, g, e); }

Egd transfer_loop_free(const StmtPtr& stmt, const Egd& in) {
  return std::visit(
      [&](const auto& n) -> Egd {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Skip>) {
          return in;
        } else if constexpr (std::is_same_v<T, Seq>) {
          return transfer_loop_free(n.second, transfer_loop_free(n.first, in));
        } else if constexpr (std::is_same_v<T, SetZero>) {
          return egd_ops::set_zero(ops, in, n.var);
        } else if constexpr (std::is_same_v<T, AddConst>) {
          return egd_ops::add_const(ops, in, n.var, n.amount);
        } else if constexpr (std::is_same_v<T, DecClamped>) {
          return egd_ops::dec(ops, in, n.var);
        } else if constexpr (std::is_same_v<T, IfThenElse>) {
          return join_strict(transfer_loop_free(n.then_branch, restrict(in, *n.cond)),
                             transfer_loop_free(n.else_branch, restrict(in, *Event::negate(n.cond))));
        } else if constexpr (std::is_same_v<T, While>) {
          throw std::invalid_argument("transfer_loop_free: program contains a loop");
        } else {
          return egd_ops::fail(ops, in.dims());
        }
      },
      stmt->node);
}

std::string to_string(const Egd& g) {
  std::ostringstream os;
  os << "EGD block shape (";
  for (std::size_t k = 0; k < g.block.rank(); ++k) os << (k ? "," : "") << g.block.extent(k);
  os << ") decay (";
  for (std::size_t k = 0; k < g.decay.size(); ++k) os << (k ? "," : "") << geobound::to_string(g.decay[k]);
  os << ") entries [";
  for (std::size_t i = 0; i < g.block.size(); ++i) os << (i ? " " : "") << geobound::to_string(g.block.flat(i));
  os << "]";
  return os.str();
}

}  // namespace geobound
