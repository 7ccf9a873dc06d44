#include <catch2/catch.hpp>

#include <random>
#include <set>

#include "roomlayout/solver.hpp"
#include "test_helpers.hpp"

using namespace roomlayout;

namespace {

// Hand-built candidate set: quads (or arbitrary loops) on fronto-parallel
// planes, enough structure for plausibility and enumeration tests.
struct ManualSet {
    CandidateSet set;

    int add_plane(double z, int id, PlaneLabel label = PlaneLabel::wall) {
        set.planes.push_back(make_plane({0, 0, 1}, z, label, id));
        return id;
    }

    int add_polygon(int plane_id, double z, const std::vector<Vec2>& xy) {
        PolygonCandidate poly;
        poly.id = static_cast<int>(set.polygons.size());
        poly.plane = plane_id;
        for (const Vec2& p : xy) {
            CornerCandidate c;
            c.id = static_cast<int>(set.corners.size());
            c.planes = {plane_id, 1000 + c.id, 2000 + c.id};
            c.point = {p.x, p.y, z};
            c.pixel = {50 + 10 * p.x, 50 + 10 * p.y};
            set.corners.push_back(c);
            poly.loop.push_back(c.id);
        }
        set.polygons.push_back(poly);
        return poly.id;
    }
};

BitMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
    BitMask m(w, h);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m.set(x, y);
    return m;
}

// Exhaustive 2^N - 1 oracle over all candidate subsets: feasibility is the
// Solution contract (one polygon per plane, partition within tolerance), the
// winner the minimum cost under the documented tie rule.
std::optional<std::pair<std::vector<int>, double>> brute_force_best(
    const std::vector<SolverCandidate>& candidates, const SolveConfig& cfg, int w, int h) {
    const size_t n = candidates.size();
    std::optional<std::vector<int>> best_ids;
    double best_cost = 0.0;
    for (uint32_t bits = 1; bits < (1u << n); ++bits) {
        std::set<int> planes_used;
        bool valid = true;
        BitMask covered(w, h), dup(w, h);
        for (size_t i = 0; i < n && valid; ++i) {
            if (!(bits & (1u << i))) continue;
            if (!planes_used.insert(candidates[i].plane_id).second) valid = false;
            for (size_t word = 0; word < covered.words().size(); ++word) {
                dup.words()[word] |= covered.words()[word] & candidates[i].mask->words()[word];
                covered.words()[word] |= candidates[i].mask->words()[word];
            }
        }
        if (!valid) continue;
        const double total = static_cast<double>(w) * h;
        if (static_cast<double>(covered.count()) / total < cfg.partition.min_coverage) continue;
        if (static_cast<double>(dup.count()) / total > cfg.partition.max_overlap) continue;

        std::vector<int> ids;
        double s3 = 0.0, s2 = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (!(bits & (1u << i))) continue;
            ids.push_back(candidates[i].id);
        }
        std::sort(ids.begin(), ids.end());
        for (int id : ids) {
            for (const SolverCandidate& c : candidates) {
                if (c.id == id) {
                    s3 += c.k3d;
                    s2 += c.k2d;
                }
            }
        }
        const double cost = s3 + cfg.lambda * s2;
        bool better = !best_ids;
        if (!better && cost < best_cost) better = true;
        if (!better && cost == best_cost) {
            if (ids.size() != best_ids->size())
                better = ids.size() < best_ids->size();
            else
                better = ids < *best_ids;
        }
        if (better) {
            best_ids = ids;
            best_cost = cost;
        }
    }
    if (!best_ids) return std::nullopt;
    return std::make_pair(*best_ids, best_cost);
}

}  // namespace

TEST_CASE("plausibility_filter accepts squares and rejects slivers") {
    ManualSet m;
    m.add_plane(2.0, 0);

    const int square = m.add_polygon(0, 2.0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    REQUIRE(plausibility_filter(m.set.polygons[static_cast<size_t>(square)], m.set));

    // Two non-adjacent edges 1 mm apart.
    const int sliver = m.add_polygon(0, 2.0, {{0, 0}, {1, 0}, {1, 0.001}, {0, 0.001}});
    REQUIRE_FALSE(plausibility_filter(m.set.polygons[static_cast<size_t>(sliver)], m.set));

    // Near-zero area triangle.
    const int needle = m.add_polygon(0, 2.0, {{0, 0}, {1, 0}, {0.5, 1e-5}});
    REQUIRE_FALSE(plausibility_filter(m.set.polygons[static_cast<size_t>(needle)], m.set));
}

TEST_CASE("enumerate_feasible builds the one-polygon-per-plane product family") {
    ManualSet m;
    m.add_plane(2.0, 0);
    m.add_plane(3.0, 1);
    const int a1 = m.add_polygon(0, 2.0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const int a2 = m.add_polygon(0, 2.0, {{2, 0}, {3, 0}, {3, 1}, {2, 1}});
    const int b1 = m.add_polygon(1, 3.0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});

    const auto family = enumerate_feasible(m.set);
    std::set<std::vector<int>> got(family.begin(), family.end());
    const std::set<std::vector<int>> expected = {{}, {a1}, {a2}, {b1}, {a1, b1}, {a2, b1}};
    REQUIRE(got == expected);

    // Every yielded subset uses each plane at most once.
    for (const auto& subset : family) {
        std::set<int> planes;
        for (int id : subset)
            REQUIRE(planes.insert(m.set.polygons[static_cast<size_t>(id)].plane).second);
    }
}

TEST_CASE("enumerate_feasible excludes frustum planes and implausible polygons") {
    ManualSet m;
    m.add_plane(2.0, 0);
    m.set.planes.push_back(make_plane({1, 0, 0}, 0.0, PlaneLabel::frustum, 9));
    const int good = m.add_polygon(0, 2.0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    m.add_polygon(0, 2.0, {{0, 0}, {1, 0}, {1, 0.001}, {0, 0.001}});  // sliver
    m.add_polygon(9, 0.0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});          // frustum-owned

    const auto family = enumerate_feasible(m.set);
    std::set<std::vector<int>> got(family.begin(), family.end());
    const std::set<std::vector<int>> expected = {{}, {good}};
    REQUIRE(got == expected);
}

TEST_CASE("pruned-subset reduction on a paper-scale candidate family") {
    // 12 candidate polygons over 4 planes; 6 are implausible slivers. The
    // one-polygon-per-plane product of the plausible ones has 36 members,
    // a drastic reduction from the 4096 unconstrained subsets.
    ManualSet m;
    for (int p = 0; p < 4; ++p) m.add_plane(2.0 + p, p);
    int plausible = 0;
    const std::vector<int> counts = {1, 1, 2, 2};
    for (int p = 0; p < 4; ++p) {
        for (int i = 0; i < counts[static_cast<size_t>(p)]; ++i) {
            m.add_polygon(p, 2.0 + p,
                          {{2.0 * i, 0}, {2.0 * i + 1, 0}, {2.0 * i + 1, 1}, {2.0 * i, 1}});
            ++plausible;
        }
    }
    while (plausible + 6 > static_cast<int>(m.set.polygons.size())) {
        const int p = static_cast<int>(m.set.polygons.size()) % 4;
        m.add_polygon(p, 2.0 + p, {{5, 0}, {6, 0}, {6, 0.001}, {5, 0.001}});
    }
    REQUIRE(m.set.polygons.size() == 12);

    const auto family = enumerate_feasible(m.set);
    REQUIRE(family.size() == 36);
}

TEST_CASE("solve matches the exhaustive oracle on randomized candidate sets") {
    const int w = 32, h = 24;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ucost(0.0, 1.0);

    int feasible_sets = 0, infeasible_sets = 0;
    for (int trial = 0; trial < 60; ++trial) {
        // A horizontal strip partition guarantees some feasible subsets;
        // decoy rectangles overlap them.
        std::vector<BitMask> masks;
        std::vector<SolverCandidate> candidates;
        const int strips = 2 + static_cast<int>(rng() % 3);
        const bool sabotage = trial % 5 == 4;  // drop a strip: often infeasible
        int y0 = 0;
        for (int s = 0; s < strips; ++s) {
            int y1 = (s == strips - 1) ? h : y0 + h / strips;
            if (!(sabotage && s == 0)) masks.push_back(rect_mask(w, h, 0, y0, w, y1));
            y0 = y1;
        }
        const int decoys = static_cast<int>(rng() % 5);
        for (int d = 0; d < decoys; ++d) {
            const int x0 = static_cast<int>(rng() % w), y0d = static_cast<int>(rng() % h);
            const int x1 = x0 + 1 + static_cast<int>(rng() % (w - x0));
            const int y1 = y0d + 1 + static_cast<int>(rng() % (h - y0d));
            masks.push_back(rect_mask(w, h, x0, y0d, x1, y1));
        }
        for (size_t i = 0; i < masks.size(); ++i) {
            SolverCandidate c;
            c.id = static_cast<int>(i);
            c.plane_id = static_cast<int>(i);  // distinct planes
            c.mask = &masks[i];
            c.k3d = ucost(rng);
            c.k2d = ucost(rng);
            candidates.push_back(c);
        }

        SolveConfig cfg;
        const auto expected = brute_force_best(candidates, cfg, w, h);
        const auto actual = solve(candidates, cfg, w, h);
        if (!expected) {
            ++infeasible_sets;
            REQUIRE_FALSE(actual);
            continue;
        }
        ++feasible_sets;
        REQUIRE(actual);
        REQUIRE(std::fabs(actual->cost - expected->second) <= 1e-9);
        REQUIRE(actual->polygon_ids == expected->first);
        REQUIRE(actual->report.subsets_feasible > 0);
    }
    REQUIRE(feasible_sets > 20);
    REQUIRE(infeasible_sets > 0);
}

TEST_CASE("solve honors one polygon per plane with multiple options") {
    const int w = 16, h = 16;
    std::vector<BitMask> masks;
    masks.push_back(rect_mask(w, h, 0, 0, 16, 8));   // plane 0, top
    masks.push_back(rect_mask(w, h, 0, 8, 16, 16));  // plane 0, bottom (same plane!)
    masks.push_back(rect_mask(w, h, 0, 8, 16, 16));  // plane 1, bottom

    std::vector<SolverCandidate> candidates = {
        {0, 0, &masks[0], 0.1, 0.0},
        {1, 0, &masks[1], 0.1, 0.0},
        {2, 1, &masks[2], 0.5, 0.0},
    };
    SolveConfig cfg;
    const auto solution = solve(candidates, cfg, w, h);
    // {0,1} would tile perfectly but shares plane 0; the only legal tiling is
    // {0,2} despite its higher cost.
    REQUIRE(solution);
    REQUIRE(solution->polygon_ids == std::vector<int>{0, 2});
}

TEST_CASE("equal-cost ties go to fewer polygons, then lexicographic ids") {
    const int w = 16, h = 16;
    std::vector<BitMask> masks;
    masks.push_back(rect_mask(w, h, 0, 0, 16, 16));  // full frame
    masks.push_back(rect_mask(w, h, 0, 0, 8, 16));   // left half
    masks.push_back(rect_mask(w, h, 8, 0, 16, 16));  // right half

    std::vector<SolverCandidate> candidates = {
        {0, 0, &masks[0], 0.25, 0.0},
        {1, 1, &masks[1], 0.125, 0.0},
        {2, 2, &masks[2], 0.125, 0.0},
    };
    SolveConfig cfg;
    const auto solution = solve(candidates, cfg, w, h);
    REQUIRE(solution);
    REQUIRE(solution->cost == 0.25);
    REQUIRE(solution->polygon_ids == std::vector<int>{0});

    // Lexicographic tie: two distinct tilings of equal size and cost.
    std::vector<BitMask> masks2;
    masks2.push_back(rect_mask(w, h, 0, 0, 8, 16));    // id 0, plane 0
    masks2.push_back(rect_mask(w, h, 8, 0, 16, 16));   // id 1, plane 1
    masks2.push_back(rect_mask(w, h, 0, 0, 16, 8));    // id 2, plane 2
    masks2.push_back(rect_mask(w, h, 0, 8, 16, 16));   // id 3, plane 3
    std::vector<SolverCandidate> candidates2 = {
        {0, 0, &masks2[0], 0.125, 0.0},
        {1, 1, &masks2[1], 0.125, 0.0},
        {2, 2, &masks2[2], 0.125, 0.0},
        {3, 3, &masks2[3], 0.125, 0.0},
    };
    const auto solution2 = solve(candidates2, cfg, w, h);
    REQUIRE(solution2);
    REQUIRE(solution2->polygon_ids == std::vector<int>{0, 1});
}

TEST_CASE("empty subset is never a solution") {
    const int w = 8, h = 8;
    std::vector<BitMask> masks;
    masks.push_back(rect_mask(w, h, 0, 0, 2, 2));  // far from a partition
    std::vector<SolverCandidate> candidates = {{0, 0, &masks[0], 0.0, 0.0}};
    SolveConfig cfg;
    REQUIRE_FALSE(solve(candidates, cfg, w, h));
    REQUIRE_FALSE(solve({}, cfg, w, h));
}

TEST_CASE("pruned search equals unpruned search beyond the fallback limit") {
    const int w = 32, h = 24;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ucost(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<BitMask> masks;
        const int strips = 3;
        int y0 = 0;
        for (int s = 0; s < strips; ++s) {
            const int y1 = (s == strips - 1) ? h : y0 + h / strips;
            masks.push_back(rect_mask(w, h, 0, y0, w, y1));
            // A second option per plane: slightly overgrown strip.
            masks.push_back(rect_mask(w, h, 0, std::max(0, y0 - 1), w, std::min(h, y1 + 1)));
            y0 = y1;
        }
        std::vector<SolverCandidate> candidates;
        for (size_t i = 0; i < masks.size(); ++i)
            candidates.push_back({static_cast<int>(i), static_cast<int>(i / 2), &masks[i],
                                  ucost(rng), ucost(rng)});

        SolveConfig pruned;
        pruned.exhaustive_fallback_limit = 0;  // force pruning on
        SolveConfig unpruned;
        unpruned.exhaustive_fallback_limit = 1000;  // force it off

        const auto a = solve(candidates, pruned, w, h);
        const auto b = solve(candidates, unpruned, w, h);
        REQUIRE(a.has_value() == b.has_value());
        if (a) {
            REQUIRE(a->polygon_ids == b->polygon_ids);
            REQUIRE(a->cost == b->cost);
            REQUIRE(a->report.pruning_used);
            REQUIRE_FALSE(b->report.pruning_used);
        }
    }
}

TEST_CASE("solve is deterministic") {
    const int w = 16, h = 16;
    std::vector<BitMask> masks;
    masks.push_back(rect_mask(w, h, 0, 0, 16, 8));
    masks.push_back(rect_mask(w, h, 0, 8, 16, 16));
    masks.push_back(rect_mask(w, h, 0, 0, 16, 16));
    std::vector<SolverCandidate> candidates = {
        {0, 0, &masks[0], 0.1, 0.2},
        {1, 1, &masks[1], 0.3, 0.05},
        {2, 2, &masks[2], 0.4, 0.3},
    };
    SolveConfig cfg;
    const auto a = solve(candidates, cfg, w, h);
    const auto b = solve(candidates, cfg, w, h);
    REQUIRE(a);
    REQUIRE(b);
    REQUIRE(a->polygon_ids == b->polygon_ids);
    REQUIRE(a->cost == b->cost);
}
