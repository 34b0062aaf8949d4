#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "wmattr/codebook.hpp"
#include "wmattr/rng.hpp"
#include "wmattr/watermark.hpp"

namespace wmattr {

// Watermark selection: pick w for a new user so that the largest number of
// bits it shares with any registered watermark is as small as possible
// (the farthest string problem under Hamming distance).
//
// The decision version asks for any w with max_i matched(w_i, w) <= m. The
// solvers below return the watermark when they find one and std::nullopt
// (NotExist) otherwise. Approximate solvers may miss a solution but never
// return an invalid one.

enum class SelectionKind { Random, BSTA, NRG, ABSTA };

std::string_view to_string(SelectionKind kind);
/// Accepts random, bsta, nrg, absta (also "a-bsta"), case-insensitive.
SelectionKind parse_selection_kind(std::string_view name);

struct SelectionStrategy {
    SelectionKind kind = SelectionKind::ABSTA;
    /// Recursion depth cap for A-BSTA.
    int depth = 8;
    std::uint64_t rng_seed = 0;
    /// Recursion-node cap for exact BSTA; exceeding it raises ResourceLimit.
    std::uint64_t node_budget = 10'000'000;
};

using DecisionOutcome = std::optional<Watermark>;

/// Counts recursion nodes and throws ResourceLimit past the cap (0 = unlimited).
struct SearchBudget {
    std::uint64_t cap = 0;
    std::uint64_t nodes = 0;

    void charge();
};

/// Bounded search tree. Starting from init, repeatedly flips one of the first
/// m+1 positions shared with the most similar registered watermark, up to
/// depth levels. With init = ~w_1 and depth = m the answer is exact.
DecisionOutcome bsta_decision(const Codebook& existing, const Watermark& init, int depth, std::size_t m,
                              SearchBudget* budget = nullptr);

/// Non-redundant guess: flips (matched - m) random shared positions per round,
/// never touching a position twice, and gives up once m flips are spent.
DecisionOutcome nrg_decision(const Codebook& existing, const Watermark& init, std::size_t m, Rng& rng);

/// BSTA from a uniformly random start with a constant depth cap.
DecisionOutcome absta_decision(const Codebook& existing, int depth, std::size_t m, Rng& rng);

/// Each bit an independent fair coin.
Watermark random_select(std::size_t n, Rng& rng);

struct Selection {
    Watermark watermark;
    /// Every registered watermark shares at most achieved_m bits with watermark.
    std::size_t achieved_m = 0;
    /// Number of decision-problem calls made.
    std::size_t decisions = 0;
};

/// Incremental selection loop: starts m at the largest overlap between the
/// most recent watermark and the ones before it, and raises m by one until
/// the decision solver succeeds. The first user gets a random watermark.
/// Random strategy reports its actual maximum overlap as achieved_m.
Selection select_watermark(const Codebook& existing, const SelectionStrategy& strategy);

/// Largest matched-bit count between the newest watermark and the earlier
/// ones; 0 when fewer than two watermarks exist.
std::size_t warm_start_m(const Codebook& existing);

struct FarthestString {
    Watermark watermark;
    std::size_t m_opt = 0;
};

inline constexpr std::size_t kBruteForceMaxBits = 20;

/// Exhaustive scan over all 2^n candidates in lexicographic order of the
/// bitstring (bit 0 first). Returns the first minimiser. n <= 20.
FarthestString brute_force_farthest(const Codebook& existing);

/// Seed for the registration of the user at `index` (0-based) under a master
/// seed. Sequential registration with these seeds reproduces generate_codebook.
std::uint64_t registration_seed(std::uint64_t master, std::size_t index);

/// Builds a codebook of s users named "u1".."us" with the given strategy;
/// user i's selection is seeded with registration_seed(strategy.rng_seed, i).
Codebook generate_codebook(std::size_t n, std::size_t s, const SelectionStrategy& strategy);

} // namespace wmattr
