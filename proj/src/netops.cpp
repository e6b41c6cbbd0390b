#include "tbp/netops.hpp"

#include <algorithm>
#include <stdexcept>

namespace tbp {

TemporalNetwork::PostReceipt post_atom(TemporalNetwork& net, const PrimitiveAtom& atom,
                                       TokenPoints a, TokenPoints b) {
  const TokenPoints fst = atom.swapped ? b : a;
  const TokenPoints snd = atom.swapped ? a : b;
  switch (atom.kind) {
    case RelKind::start_before_start:
      return net.add_requirement(fst.s, snd.s, atom.bound);
    case RelKind::end_before_end:
      return net.add_requirement(fst.e, snd.e, atom.bound);
    case RelKind::start_before_end:
      return net.add_requirement(fst.s, snd.e, atom.bound);
    case RelKind::end_before_start:
      return net.add_requirement(fst.e, snd.s, atom.bound);
    case RelKind::starts_before:
    case RelKind::ends_before: {
      if (!atom.anchor || atom.anchor->infinite())
        throw std::invalid_argument("point atom needs a finite anchor");
      const TemporalNetwork::point_id p =
          atom.kind == RelKind::starts_before ? fst.s : fst.e;
      const ticks_t t = atom.anchor->value();
      const ticks_t lb = atom.bound.lb.value();
      if (t < lb)
        return net.add_requirement(TemporalNetwork::origin, TemporalNetwork::origin, Bound(1, 1));
      const ticks_t lo =
          atom.bound.ub.infinite() ? 0 : std::max<ticks_t>(0, t - atom.bound.ub.value());
      return net.add_requirement(TemporalNetwork::origin, p, Bound(lo, t - lb));
    }
    default:
      throw std::invalid_argument("post_atom: relation is not primitive");
  }
}

std::vector<TemporalNetwork::PostReceipt> post_relation(TemporalNetwork& net, const Relation& rel,
                                                        TokenPoints a, TokenPoints b) {
  std::vector<TemporalNetwork::PostReceipt> receipts;
  for (const PrimitiveAtom& atom : expand_relation(rel)) receipts.push_back(post_atom(net, atom, a, b));
  return receipts;
}

}  // namespace tbp
