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

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace h2ion {

/// Orbital occupied by one electron. Detached is the bookkeeping level of an
/// electron that has left the molecule.
enum class ElectronLevel : std::uint8_t { Phi0 = 0, Phi1 = 1, Phi2 = 2, Detached = 3 };

enum class Spin : std::uint8_t { Up, Down };

/// The five bosonic registers, in basis order.
enum class Mode : std::uint8_t { Omega12Up = 0, Omega12Dn = 1, Omega01Up = 2, Omega01Dn = 3, Phonon = 4 };

inline constexpr std::array<Mode, 5> kAllModes = {Mode::Omega12Up, Mode::Omega12Dn, Mode::Omega01Up,
                                                  Mode::Omega01Dn, Mode::Phonon};

std::string to_string(ElectronLevel level);
std::string to_string(Mode mode);

/// One configuration of the nine registers |p1 p2 p3 p4 p5, L, k, l1, l2>.
///
/// `bond` is 0 when the covalent bond is formed and 1 when broken; `nuclei` is
/// 0 when both nuclei share a cavity and 1 when they are scattered.
struct BasisState {
  std::array<int, 5> quanta{};
  int bond = 0;
  int nuclei = 0;
  ElectronLevel up = ElectronLevel::Phi0;
  ElectronLevel dn = ElectronLevel::Phi0;

  int& count(Mode m) { return quanta[static_cast<std::size_t>(m)]; }
  int count(Mode m) const { return quanta[static_cast<std::size_t>(m)]; }
  ElectronLevel& level(Spin s) { return s == Spin::Up ? up : dn; }
  ElectronLevel level(Spin s) const { return s == Spin::Up ? up : dn; }

  // Member order gives the lexicographic basis order (p1..p5, L, k, l1, l2).
  auto operator<=>(const BasisState&) const = default;

  /// Dense 32-bit encoding; unique for occupation numbers below 16.
  std::uint32_t key() const;
};

/// Occupancy rules: at most one electron in Phi2 and at most one detached.
bool is_allowed(const BasisState& s);

std::string describe(const BasisState& s);

/// Per-register maxima. `omega12` caps p1 and p2; `omega01` caps p3, p4 and
/// the phonon count p5.
struct Cutoffs {
  int omega12 = 2;
  int omega01 = 1;

  int of(Mode m) const { return (m == Mode::Omega12Up || m == Mode::Omega12Dn) ? omega12 : omega01; }
  bool operator==(const Cutoffs&) const = default;
};

/// Ordered, constraint-filtered basis with an inverse index. Immutable after
/// construction.
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(std::vector<BasisState> states, Cutoffs cutoffs);

  std::size_t dim() const { return states_.size(); }
  const BasisState& state(std::size_t i) const { return states_[i]; }
  const std::vector<BasisState>& states() const { return states_; }
  const Cutoffs& cutoffs() const { return cutoffs_; }

  std::optional<std::size_t> find(const BasisState& s) const;
  /// Throws std::out_of_range when `s` is not part of the space.
  std::size_t index_of(const BasisState& s) const;

  /// FNV-1a digest of the ordered state keys; identifies a basis ordering in
  /// output headers.
  std::uint64_t ordering_hash() const;

 private:
  std::vector<BasisState> states_;
  std::unordered_map<std::uint32_t, std::size_t> index_;
  Cutoffs cutoffs_;
};

/// Enumerates every allowed state in lexicographic order.
StateSpace build_state_space(const Cutoffs& cutoffs);

/// Smallest subset of `space` containing `seed` and closed under the symmetric
/// adjacency given by `support` (pairs of indices into `space`). States keep
/// their relative order.
StateSpace reachable_subspace(const StateSpace& space,
                              std::span<const std::pair<std::size_t, std::size_t>> support,
                              std::span<const std::size_t> seed);

}  // namespace h2ion
