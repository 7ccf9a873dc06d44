#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "roomlayout/candidates.hpp"
#include "roomlayout/cost.hpp"
#include "roomlayout/raster.hpp"

namespace roomlayout {

struct SolveConfig {
    double lambda = 1.0;
    double plausibility_min_gap = 0.05;   // meters, between non-adjacent edges
    double plausibility_min_area = 1e-4;  // m^2
    PartitionTolerances partition;
    int exhaustive_fallback_limit = 20;   // below this, search without pruning
};

struct SearchReport {
    long subsets_generated = 0;  // complete subsets evaluated
    long subsets_feasible = 0;   // passing the partition constraint
    long nodes_visited = 0;
    double wall_clock_ms = 0.0;
    bool pruning_used = false;
};

struct Solution {
    std::vector<int> polygon_ids;  // ascending
    double cost = 0.0;
    SearchReport report;
};

// Degenerate slivers are not plausible layout components: any two
// non-adjacent edges closer than the gap in 3D, or near-zero 3D area.
inline bool plausibility_filter(const PolygonCandidate& poly, const CandidateSet& set,
                                double min_gap = 0.05, double min_area = 1e-4) {
    const std::vector<Vec3> pts = set.loop_points(poly);
    const size_t n = pts.size();
    if (n < 3) return false;

    Vec3 area_vec{0, 0, 0};
    for (size_t i = 0; i < n; ++i) area_vec += cross(pts[i], pts[(i + 1) % n]);
    if (0.5 * norm(area_vec) < min_area) return false;

    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segment_segment_distance(pts[i], pts[(i + 1) % n], pts[j],
                                         pts[(j + 1) % n]) < min_gap)
                return false;
        }
    }
    return true;
}

// The one-polygon-per-plane subset family of the plausible candidates,
// including the empty subset, before any partition filtering. Exponential;
// intended for small candidate sets and tests.
inline std::vector<std::vector<int>> enumerate_feasible(const CandidateSet& set,
                                                        double min_gap = 0.05,
                                                        double min_area = 1e-4) {
    std::map<int, std::vector<int>> by_plane;  // plane id -> plausible polygon ids
    for (const PolygonCandidate& poly : set.polygons) {
        if (set.plane_by_id(poly.plane).label == PlaneLabel::frustum) continue;
        if (!plausibility_filter(poly, set, min_gap, min_area)) continue;
        by_plane[poly.plane].push_back(poly.id);
    }
    for (auto& [plane, ids] : by_plane) std::sort(ids.begin(), ids.end());

    std::vector<std::vector<int>> out;
    std::vector<int> current;
    std::vector<const std::vector<int>*> groups;
    for (const auto& [plane, ids] : by_plane) groups.push_back(&ids);

    std::function<void(size_t)> rec = [&](size_t level) {
        if (level == groups.size()) {
            out.push_back(current);
            return;
        }
        rec(level + 1);  // skip this plane
        for (int id : *groups[level]) {
            current.push_back(id);
            rec(level + 1);
            current.pop_back();
        }
    };
    rec(0);
    return out;
}

// Solver input decoupled from 3D geometry: a candidate is its plane group,
// raster footprint, and precomputed cost terms.
struct SolverCandidate {
    int id = -1;
    int plane_id = -1;
    const BitMask* mask = nullptr;
    double k3d = 0.0;
    double k2d = 0.0;
};

namespace detail {

struct SubsetSearch {
    const std::vector<std::vector<const SolverCandidate*>>& groups;
    const SolveConfig& cfg;
    int width, height;
    bool prune;

    double total_px;
    SearchReport report;

    std::vector<int> chosen;
    std::vector<const SolverCandidate*> chosen_cands;
    double acc_cost = 0.0;

    std::optional<std::vector<int>> best_ids;
    double best_cost = 0.0;

    // One buffer per taken candidate; skipped planes share their parent's.
    std::vector<BitMask> covered_stack;
    std::vector<BitMask> dup_stack;
    std::vector<size_t> dup_count_stack;
    std::vector<size_t> covered_count_stack;
    // Largest additional coverage any one candidate of plane >= level brings.
    std::vector<size_t> max_gain_suffix;

    SubsetSearch(const std::vector<std::vector<const SolverCandidate*>>& g,
                 const SolveConfig& c, int w, int h, bool pr)
        : groups(g), cfg(c), width(w), height(h), prune(pr),
          total_px(static_cast<double>(w) * h) {
        const size_t depth = groups.size() + 1;
        covered_stack.assign(depth, BitMask(w, h));
        dup_stack.assign(depth, BitMask(w, h));
        dup_count_stack.assign(depth, 0);
        covered_count_stack.assign(depth, 0);
        max_gain_suffix.assign(depth, 0);
        for (size_t level = groups.size(); level-- > 0;) {
            size_t best = 0;
            for (const SolverCandidate* cand : groups[level])
                best = std::max(best, cand->mask->count());
            max_gain_suffix[level] = max_gain_suffix[level + 1] + best;
        }
    }

    // Exact subset cost in the documented fold order (ascending ids).
    double leaf_cost() const {
        std::vector<const SolverCandidate*> sorted = chosen_cands;
        std::sort(sorted.begin(), sorted.end(),
                  [](const SolverCandidate* a, const SolverCandidate* b) { return a->id < b->id; });
        double s3 = 0.0, s2 = 0.0;
        for (const SolverCandidate* c : sorted) {
            s3 += c->k3d;
            s2 += c->k2d;
        }
        return s3 + cfg.lambda * s2;
    }

    bool better_than_best(double cost, const std::vector<int>& ids) const {
        if (!best_ids) return true;
        if (cost < best_cost) return true;
        if (cost > best_cost) return false;
        if (ids.size() != best_ids->size()) return ids.size() < best_ids->size();
        return ids < *best_ids;
    }

    void dfs(size_t level, size_t buf) {
        ++report.nodes_visited;
        if (prune) {
            if (best_ids && acc_cost > best_cost + 1e-12) return;
            if (static_cast<double>(dup_count_stack[buf]) / total_px > cfg.partition.max_overlap)
                return;
            // Even taking the largest candidate of every remaining plane
            // cannot reach the coverage threshold.
            const double reachable =
                static_cast<double>(covered_count_stack[buf] + max_gain_suffix[level]) / total_px;
            if (reachable < cfg.partition.min_coverage) return;
        }

        if (level == groups.size()) {
            ++report.subsets_generated;
            if (chosen.empty()) return;  // never a partition of a nonempty image
            const double coverage = static_cast<double>(covered_count_stack[buf]) / total_px;
            const double overlap = static_cast<double>(dup_count_stack[buf]) / total_px;
            if (coverage < cfg.partition.min_coverage || overlap > cfg.partition.max_overlap)
                return;
            ++report.subsets_feasible;
            const double cost = leaf_cost();
            std::vector<int> ids = chosen;
            std::sort(ids.begin(), ids.end());
            if (better_than_best(cost, ids)) {
                best_ids = ids;
                best_cost = cost;
            }
            return;
        }

        for (const SolverCandidate* cand : groups[level]) {
            BitMask& covered = covered_stack[buf + 1];
            BitMask& dup = dup_stack[buf + 1];
            covered = covered_stack[buf];
            dup = dup_stack[buf];
            size_t covered_count = 0, dup_count = 0;
            const auto& mwords = cand->mask->words();
            for (size_t i = 0; i < mwords.size(); ++i) {
                dup.words()[i] |= covered.words()[i] & mwords[i];
                covered.words()[i] |= mwords[i];
                covered_count += static_cast<size_t>(__builtin_popcountll(covered.words()[i]));
                dup_count += static_cast<size_t>(__builtin_popcountll(dup.words()[i]));
            }
            covered_count_stack[buf + 1] = covered_count;
            dup_count_stack[buf + 1] = dup_count;

            chosen.push_back(cand->id);
            chosen_cands.push_back(cand);
            acc_cost += cand->k3d + cfg.lambda * cand->k2d;
            dfs(level + 1, buf + 1);
            acc_cost -= cand->k3d + cfg.lambda * cand->k2d;
            chosen_cands.pop_back();
            chosen.pop_back();
        }

        // Skip this plane; the raster state is unchanged.
        dfs(level + 1, buf);
    }
};

}  // namespace detail

// Minimum-cost partition-feasible subset with at most one polygon per plane.
// Ties break to fewer polygons, then lexicographically smaller id sequences.
// Absent when no subset passes the partition constraint.
inline std::optional<Solution> solve(const std::vector<SolverCandidate>& candidates,
                                     const SolveConfig& cfg, int width, int height) {
    const auto t0 = std::chrono::steady_clock::now();

    std::map<int, std::vector<const SolverCandidate*>> by_plane;
    for (const SolverCandidate& c : candidates) by_plane[c.plane_id].push_back(&c);
    std::vector<std::vector<const SolverCandidate*>> groups;
    for (auto& [plane, cands] : by_plane) {
        // Cheapest candidates first: good incumbents early make the cost
        // bound effective. The winner is order-independent (explicit
        // comparator), so this only affects traversal.
        std::sort(cands.begin(), cands.end(),
                  [&cfg](const SolverCandidate* a, const SolverCandidate* b) {
                      const double ca = a->k3d + cfg.lambda * a->k2d;
                      const double cb = b->k3d + cfg.lambda * b->k2d;
                      if (ca != cb) return ca < cb;
                      return a->id < b->id;
                  });
        groups.push_back(cands);
    }

    const bool prune = static_cast<int>(candidates.size()) > cfg.exhaustive_fallback_limit;
    detail::SubsetSearch search(groups, cfg, width, height, prune);
    search.report.pruning_used = prune;
    search.dfs(0, 0);

    const auto t1 = std::chrono::steady_clock::now();
    search.report.wall_clock_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();

    if (!search.best_ids) return std::nullopt;
    Solution sol;
    sol.polygon_ids = *search.best_ids;
    sol.cost = search.best_cost;
    sol.report = search.report;
    return sol;
}

}  // namespace roomlayout
