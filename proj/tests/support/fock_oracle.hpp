#pragma once

#include <netchar/linalg.hpp>

#include <map>
#include <utility>

namespace netchar::testing {

// Brute-force two-photon output distribution, used as an oracle for the
// closed-form coincidence expressions. Each input photon's creation operator
// is expanded across the output modes and applied to an occupation-number
// state map with explicit bosonic sqrt(n+1) factors; nothing here shares
// code or algebra with the expressions under test. For lossy matrices the
// probabilities sum to less than one, the deficit being the lost photons.
//
// Keys are output pairs (k, l) with k <= l, 0-based.
std::map<std::pair<int, int>, double> two_photon_fock_oracle(const linalg::Matrix& m,
                                                             int input_i, int input_j);

} // namespace netchar::testing
