// Copyright 2026 The h2ion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "h2ion/hilbert.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace h2ion {

std::string to_string(ElectronLevel level) {
  switch (level) {
    case ElectronLevel::Phi0: return "Phi0";
    case ElectronLevel::Phi1: return "Phi1";
    case ElectronLevel::Phi2: return "Phi2";
    case ElectronLevel::Detached: return "Detached";
  }
  return "?";
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Omega12Up: return "omega12_up";
    case Mode::Omega12Dn: return "omega12_dn";
    case Mode::Omega01Up: return "omega01_up";
    case Mode::Omega01Dn: return "omega01_dn";
    case Mode::Phonon: return "phonon";
  }
  return "?";
}

std::uint32_t BasisState::key() const {
  std::uint32_t k = 0;
  for (int q : quanta) k = (k << 4) | static_cast<std::uint32_t>(q & 0xF);
  k = (k << 1) | static_cast<std::uint32_t>(bond & 1);
  k = (k << 1) | static_cast<std::uint32_t>(nuclei & 1);
  k = (k << 2) | static_cast<std::uint32_t>(up);
  k = (k << 2) | static_cast<std::uint32_t>(dn);
  return k;
}

bool is_allowed(const BasisState& s) {
  const bool both_phi2 = s.up == ElectronLevel::Phi2 && s.dn == ElectronLevel::Phi2;
  const bool both_detached = s.up == ElectronLevel::Detached && s.dn == ElectronLevel::Detached;
  return !both_phi2 && !both_detached;
}

std::string describe(const BasisState& s) {
  std::ostringstream os;
  os << '|';
  for (int q : s.quanta) os << q;
  os << " L=" << s.bond << " k=" << s.nuclei << ' ' << to_string(s.up) << ',' << to_string(s.dn) << '>';
  return os.str();
}

StateSpace::StateSpace(std::vector<BasisState> states, Cutoffs cutoffs)
    : states_(std::move(states)), cutoffs_(cutoffs) {
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!index_.emplace(states_[i].key(), i).second) {
      throw std::invalid_argument("duplicate basis state " + describe(states_[i]));
    }
  }
}

std::optional<std::size_t> StateSpace::find(const BasisState& s) const {
  auto it = index_.find(s.key());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t StateSpace::index_of(const BasisState& s) const {
  if (auto i = find(s)) return *i;
  throw std::out_of_range("state not in space: " + describe(s));
}

std::uint64_t StateSpace::ordering_hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& s : states_) {
    std::uint32_t k = s.key();
    for (int b = 0; b < 4; ++b) {
      h ^= (k >> (8 * b)) & 0xFFu;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

StateSpace build_state_space(const Cutoffs& cutoffs) {
  if (cutoffs.omega12 < 0 || cutoffs.omega01 < 0) throw std::invalid_argument("negative cutoff");
  if (cutoffs.omega12 > 15 || cutoffs.omega01 > 15) throw std::invalid_argument("cutoff above 15 not supported");
  constexpr std::array<ElectronLevel, 4> levels = {ElectronLevel::Phi0, ElectronLevel::Phi1, ElectronLevel::Phi2,
                                                   ElectronLevel::Detached};
  std::vector<BasisState> states;
  BasisState s;
  for (s.quanta[0] = 0; s.quanta[0] <= cutoffs.omega12; ++s.quanta[0])
    for (s.quanta[1] = 0; s.quanta[1] <= cutoffs.omega12; ++s.quanta[1])
      for (s.quanta[2] = 0; s.quanta[2] <= cutoffs.omega01; ++s.quanta[2])
        for (s.quanta[3] = 0; s.quanta[3] <= cutoffs.omega01; ++s.quanta[3])
          for (s.quanta[4] = 0; s.quanta[4] <= cutoffs.omega01; ++s.quanta[4])
            for (s.bond = 0; s.bond <= 1; ++s.bond)
              for (s.nuclei = 0; s.nuclei <= 1; ++s.nuclei)
                for (auto up : levels)
                  for (auto dn : levels) {
                    s.up = up;
                    s.dn = dn;
                    if (is_allowed(s)) states.push_back(s);
                  }
  return StateSpace(std::move(states), cutoffs);
}

StateSpace reachable_subspace(const StateSpace& space,
                              std::span<const std::pair<std::size_t, std::size_t>> support,
                              std::span<const std::size_t> seed) {
  if (seed.empty()) throw std::invalid_argument("empty reachability seed");
  const std::size_t n = space.dim();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (auto [r, c] : support) {
    if (r >= n || c >= n) throw std::out_of_range("support index out of range");
    if (r == c) continue;
    adjacency[r].push_back(c);
    adjacency[c].push_back(r);
  }
  std::vector<char> seen(n, 0);
  std::deque<std::size_t> frontier;
  for (std::size_t i : seed) {
    if (i >= n) throw std::out_of_range("seed index out of range");
    if (!seen[i]) {
      seen[i] = 1;
      frontier.push_back(i);
    }
  }
  while (!frontier.empty()) {
    std::size_t i = frontier.front();
    frontier.pop_front();
    for (std::size_t j : adjacency[i]) {
      if (!seen[j]) {
        seen[j] = 1;
        frontier.push_back(j);
      }
    }
  }
  std::vector<BasisState> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (seen[i]) kept.push_back(space.state(i));
  return StateSpace(std::move(kept), space.cutoffs());
}

}  // namespace h2ion
