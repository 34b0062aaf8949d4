#include "wmattr/selection.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "wmattr/errors.hpp"

namespace wmattr {

std::string_view to_string(SelectionKind kind) {
    switch (kind) {
    case SelectionKind::Random: return "random";
    case SelectionKind::BSTA: return "bsta";
    case SelectionKind::NRG: return "nrg";
    case SelectionKind::ABSTA: return "absta";
    }
    return "?";
}

SelectionKind parse_selection_kind(std::string_view name) {
    std::string lower;
    for (char c : name) {
        if (c != '-' && c != '_') lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (lower == "random") return SelectionKind::Random;
    if (lower == "bsta") return SelectionKind::BSTA;
    if (lower == "nrg") return SelectionKind::NRG;
    if (lower == "absta") return SelectionKind::ABSTA;
    throw ConfigError("unknown selection strategy '" + std::string(name) + "'");
}

void SearchBudget::charge() {
    if (++nodes > cap && cap != 0) {
        throw ResourceLimit("exact BSTA exceeded its budget of " + std::to_string(cap) + " recursion nodes");
    }
}

namespace {

void check_decision_args(const Codebook& existing, const Watermark& init, std::size_t m) {
    if (existing.empty()) {
        throw std::invalid_argument("decision problem needs at least one registered watermark");
    }
    if (init.size() != existing.n()) {
        throw LengthMismatch(existing.n(), init.size());
    }
    if (m > existing.n()) {
        throw std::invalid_argument("m exceeds the watermark length");
    }
}

/// Appends the positions (ascending) where a and b agree, stopping at limit.
void shared_positions(std::span<const Word> a, std::span<const Word> b, std::size_t n, std::size_t limit,
                      std::vector<std::size_t>& out) {
    out.clear();
    for (std::size_t w = 0; w < a.size() && out.size() < limit; ++w) {
        Word eq = ~(a[w] ^ b[w]);
        if (const std::size_t rem = n - w * kWordBits; rem < kWordBits) {
            eq &= (Word{1} << rem) - 1;
        }
        while (eq != 0 && out.size() < limit) {
            out.push_back(w * kWordBits + static_cast<std::size_t>(std::countr_zero(eq)));
            eq &= eq - 1;
        }
    }
}

/// Open-addressing map from a packed bitstring to the largest remaining depth
/// at which the search already failed from that state.
class FailedStates {
public:
    explicit FailedStates(std::size_t stride) : stride_(stride) { rehash(1024); }

    /// True when the state failed before with at least `depth` levels left.
    bool known_failure(std::span<const Word> key, int depth) const {
        const std::size_t slot = find(key);
        return depths_[slot] >= 0 && depths_[slot] >= depth;
    }

    void record(std::span<const Word> key, int depth) {
        if (2 * (size_ + 1) > depths_.size()) rehash(2 * depths_.size());
        const std::size_t slot = find(key);
        if (depths_[slot] < 0) {
            std::copy(key.begin(), key.end(), keys_.begin() + static_cast<std::ptrdiff_t>(slot * stride_));
            depths_[slot] = depth;
            ++size_;
        } else {
            depths_[slot] = std::max(depths_[slot], depth);
        }
    }

private:
    std::size_t hash(std::span<const Word> key) const {
        std::uint64_t h = 0x243F6A8885A308D3ULL;
        for (Word w : key) h = splitmix64(h ^ w);
        return static_cast<std::size_t>(h);
    }

    std::size_t find(std::span<const Word> key) const {
        const std::size_t mask = depths_.size() - 1;
        for (std::size_t slot = hash(key) & mask;; slot = (slot + 1) & mask) {
            if (depths_[slot] < 0) return slot;
            if (std::equal(key.begin(), key.end(), keys_.begin() + static_cast<std::ptrdiff_t>(slot * stride_))) {
                return slot;
            }
        }
    }

    void rehash(std::size_t capacity) {
        std::vector<Word> old_keys = std::move(keys_);
        std::vector<int> old_depths = std::move(depths_);
        keys_.assign(capacity * stride_, 0);
        depths_.assign(capacity, -1);
        size_ = 0;
        for (std::size_t slot = 0; slot < old_depths.size(); ++slot) {
            if (old_depths[slot] >= 0) {
                record(std::span<const Word>(old_keys).subspan(slot * stride_, stride_), old_depths[slot]);
            }
        }
    }

    std::size_t stride_;
    std::size_t size_ = 0;
    std::vector<Word> keys_;
    std::vector<int> depths_;
};

class BoundedSearch {
public:
    BoundedSearch(const Codebook& book, std::size_t m, SearchBudget* budget, int depth)
        : book_(book),
          m_(m),
          budget_(budget),
          levels_(static_cast<std::size_t>(std::max(depth, 0)) + 1),
          failed_(book.words_per_mark()) {
        for (auto& level : levels_) level.survivors.assign(book.words_per_mark(), 0);
    }

    bool run(std::vector<Word>& w, int d) {
        if (d < 0) return false;
        // A state that already failed with at least d levels left fails again:
        // the subtree at a smaller depth is contained in the earlier one.
        if (failed_.known_failure(w, d)) return false;
        if (budget_ != nullptr) budget_->charge();

        // Any watermark sharing more than m + d bits cannot be brought down to m
        // with d more flips.
        const std::size_t limit = m_ + static_cast<std::size_t>(d);
        auto& level = levels_[static_cast<std::size_t>(d)];
        // Children flip a single bit, so a child stays under its limit (one
        // lower) only if the bit is shared with every watermark currently at
        // limit - 1 or above.
        std::fill(level.survivors.begin(), level.survivors.end(), ~Word{0});
        std::size_t best = 0;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < book_.size(); ++i) {
            const auto other = book_.words(i);
            const std::size_t c = matched_bits(other, w, book_.n());
            if (c > limit) return fail(w, d);
            if (i == 0 || c > best) {
                best = c;
                best_i = i;
            }
            if (c + 1 >= limit) {
                for (std::size_t k = 0; k < w.size(); ++k) level.survivors[k] &= ~(other[k] ^ w[k]);
            }
        }
        if (best <= m_) return true;
        if (d == 0) return fail(w, d);

        shared_positions(w, book_.words(best_i), book_.n(), m_ + 1, level.branch);
        for (std::size_t k : level.branch) {
            const Word bit = Word{1} << (k % kWordBits);
            if ((level.survivors[k / kWordBits] & bit) == 0) continue;
            w[k / kWordBits] ^= bit;
            if (run(w, d - 1)) return true;
            w[k / kWordBits] ^= bit;
        }
        return fail(w, d);
    }

private:
    struct Level {
        std::vector<std::size_t> branch;
        std::vector<Word> survivors;
    };

    bool fail(std::span<const Word> w, int d) {
        failed_.record(w, d);
        return false;
    }

    const Codebook& book_;
    std::size_t m_;
    SearchBudget* budget_;
    std::vector<Level> levels_;
    FailedStates failed_;
};

} // namespace

DecisionOutcome bsta_decision(const Codebook& existing, const Watermark& init, int depth, std::size_t m,
                              SearchBudget* budget) {
    check_decision_args(existing, init, m);
    std::vector<Word> w(init.words().begin(), init.words().end());
    BoundedSearch search(existing, m, budget, depth);
    if (search.run(w, depth)) return Watermark(existing.n(), w);
    return std::nullopt;
}

DecisionOutcome nrg_decision(const Codebook& existing, const Watermark& init, std::size_t m, Rng& rng) {
    check_decision_args(existing, init, m);
    const std::size_t n = existing.n();
    Watermark w = init;
    std::vector<bool> frozen(n, false);
    std::vector<std::size_t> pool;
    std::size_t budget = m;

    while (true) {
        const Nearest nearest = most_similar(existing, w.words());
        if (nearest.matched > 2 * m) return std::nullopt;
        if (nearest.matched <= m) return w;
        if (budget == 0) return std::nullopt;

        pool.clear();
        const Watermark& target = w;
        const auto other = existing.words(nearest.index);
        for (std::size_t k = 0; k < n; ++k) {
            const bool shared = target.test(k) == static_cast<bool>((other[k / kWordBits] >> (k % kWordBits)) & 1U);
            if (shared && !frozen[k]) pool.push_back(k);
        }
        const std::size_t flips = nearest.matched - m;
        if (flips > pool.size()) return std::nullopt;

        // Partial Fisher-Yates: the first `flips` entries become a uniform sample.
        for (std::size_t j = 0; j < flips; ++j) {
            const std::size_t pick = j + uniform_index(rng, pool.size() - j);
            std::swap(pool[j], pool[pick]);
            w.flip(pool[j]);
            frozen[pool[j]] = true;
        }
        budget = flips >= budget ? 0 : budget - flips;
    }
}

Watermark random_select(std::size_t n, Rng& rng) {
    if (n == 0) {
        throw std::invalid_argument("watermark length must be positive");
    }
    std::vector<Word> words(words_for_bits(n));
    for (Word& word : words) word = rng();
    return {n, words};
}

DecisionOutcome absta_decision(const Codebook& existing, int depth, std::size_t m, Rng& rng) {
    if (depth < 1) {
        throw std::invalid_argument("A-BSTA depth must be at least 1");
    }
    return bsta_decision(existing, random_select(existing.n(), rng), depth, m);
}

std::size_t warm_start_m(const Codebook& existing) {
    if (existing.size() < 2) return 0;
    const std::size_t last = existing.size() - 1;
    std::size_t m = 0;
    for (std::size_t i = 0; i < last; ++i) {
        m = std::max(m, existing.matched_with(i, existing.words(last)));
    }
    return m;
}

namespace {

constexpr int kMaxFreshDraws = 1000;

Selection fresh_random(const Codebook& existing, Rng& rng, std::size_t decisions) {
    for (int attempt = 0; attempt < kMaxFreshDraws; ++attempt) {
        Watermark w = random_select(existing.n(), rng);
        if (!existing.contains(w)) {
            const std::size_t m = existing.empty() ? 0 : most_similar(existing, w.words()).matched;
            return {std::move(w), m, decisions};
        }
    }
    throw ResourceLimit("could not find an unused watermark; the codebook is (nearly) saturated");
}

} // namespace

Selection select_watermark(const Codebook& existing, const SelectionStrategy& strategy) {
    Rng rng = make_rng(strategy.rng_seed, Stream::Selection, 0);
    if (existing.empty() || strategy.kind == SelectionKind::Random) {
        return fresh_random(existing, rng, 0);
    }
    if (strategy.kind == SelectionKind::ABSTA && strategy.depth < 1) {
        throw ConfigError("A-BSTA depth must be at least 1");
    }

    const std::size_t n = existing.n();
    SearchBudget budget{strategy.node_budget, 0};
    std::size_t decisions = 0;
    for (std::size_t m = warm_start_m(existing); m <= n; ++m) {
        DecisionOutcome outcome;
        ++decisions;
        switch (strategy.kind) {
        case SelectionKind::BSTA:
            outcome = bsta_decision(existing, ~existing.watermark(0), static_cast<int>(m), m, &budget);
            break;
        case SelectionKind::NRG:
            outcome = nrg_decision(existing, ~existing.watermark(0), m, rng);
            break;
        case SelectionKind::ABSTA:
            outcome = absta_decision(existing, strategy.depth, m, rng);
            break;
        case SelectionKind::Random:
            break;
        }
        if (!outcome) continue;
        if (!existing.contains(*outcome)) return {std::move(*outcome), m, decisions};
        // A registered watermark only satisfies the decision problem at m = n.
        // Fall back to an unused random watermark, which trivially meets m = n.
        if (m == n) return fresh_random(existing, rng, decisions);
    }
    return fresh_random(existing, rng, decisions);
}

FarthestString brute_force_farthest(const Codebook& existing) {
    const std::size_t n = existing.n();
    if (n > kBruteForceMaxBits) {
        throw ResourceLimit("brute-force farthest string limited to n <= " + std::to_string(kBruteForceMaxBits) +
                            " bits, got " + std::to_string(n));
    }
    std::size_t best_m = n + 1;
    Word best_word = 0;
    const Word total = Word{1} << n;
    for (Word v = 0; v < total; ++v) {
        // Counting v upward walks bitstrings lexicographically when bit 0 is the
        // most significant bit of v.
        Word candidate = 0;
        for (std::size_t k = 0; k < n; ++k) {
            candidate |= ((v >> (n - 1 - k)) & 1U) << k;
        }
        const std::span<const Word> view(&candidate, 1);
        std::size_t worst = 0;
        for (std::size_t i = 0; i < existing.size() && worst < best_m; ++i) {
            worst = std::max(worst, existing.matched_with(i, view));
        }
        if (worst < best_m) {
            best_m = worst;
            best_word = candidate;
            if (best_m == 0) break;
        }
    }
    return {Watermark(n, std::span<const Word>(&best_word, 1)), best_m};
}

std::uint64_t registration_seed(std::uint64_t master, std::size_t index) {
    return derive_seed(master, static_cast<std::uint64_t>(Stream::Selection), index);
}

Codebook generate_codebook(std::size_t n, std::size_t s, const SelectionStrategy& strategy) {
    Codebook book(n);
    for (std::size_t i = 0; i < s; ++i) {
        SelectionStrategy per_user = strategy;
        per_user.rng_seed = registration_seed(strategy.rng_seed, i);
        Selection sel = select_watermark(book, per_user);
        book.append("u" + std::to_string(i + 1), sel.watermark);
    }
    return book;
}

} // namespace wmattr
