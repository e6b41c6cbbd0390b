#pragma once

#include "tbp/relations.hpp"
#include "tbp/stn.hpp"

namespace tbp {

// Start and end time points of one token inside a network.
struct TokenPoints {
  TemporalNetwork::point_id s = 0;
  TemporalNetwork::point_id e = 0;
};

// Posts one primitive atom between tokens a and b (b is ignored for point
// atoms). An unsatisfiable anchored atom is posted as an origin self-loop so
// the network turns inconsistent rather than silently dropping the atom.
TemporalNetwork::PostReceipt post_atom(TemporalNetwork& net, const PrimitiveAtom& atom,
                                       TokenPoints a, TokenPoints b);

// Expands `rel` and posts every primitive. Receipts come back in posting
// order; undo by unposting them in reverse.
std::vector<TemporalNetwork::PostReceipt> post_relation(TemporalNetwork& net, const Relation& rel,
                                                        TokenPoints a, TokenPoints b);

}  // namespace tbp
