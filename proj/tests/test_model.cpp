#include <cmath>

#include "doctest.h"
#include "fd_check.hpp"
#include "mgcast/model.hpp"

using namespace mgcast;

namespace {

Matrix mat(std::size_t r, std::size_t c, std::initializer_list<double> v) {
    Matrix m(r, c);
    m.data.assign(v);
    return m;
}

ModelConfig small_cfg(Variant variant, std::size_t I, std::size_t O, std::size_t J,
                      std::vector<std::size_t> nu) {
    ModelConfig cfg;
    cfg.variant = variant;
    cfg.input_len = I;
    cfg.output_len = O;
    cfg.grids = J;
    cfg.smoothing_iters = std::move(nu);
    return cfg;
}

}  // namespace

TEST_CASE("smooth_step: zero correction leaves u unchanged") {
    const Vector u{1.5, -0.5};
    const Vector f{2.0, 2.0};
    const Vector out =
        smooth_step(u, f, Matrix::identity(2), Vector{0, 0}, Matrix(2, 2), Vector{0, 0});
    CHECK(out == u);
}

TEST_CASE("smooth_step: u = 0 with identity B collapses to relu(f)") {
    const Vector u{0.0, 0.0};
    const Vector f{2.0, -3.0};
    const Vector out =
        smooth_step(u, f, Matrix::identity(2), Vector{0, 0}, Matrix::identity(2), Vector{0, 0});
    CHECK(out == Vector{2.0, 0.0});
}

TEST_CASE("smooth_step hand oracle: u=(1,0), f=(2,2), A=B=I") {
    const Vector out = smooth_step(Vector{1.0, 0.0}, Vector{2.0, 2.0}, Matrix::identity(2),
                                   Vector{0, 0}, Matrix::identity(2), Vector{0, 0});
    // residual (1,2); relu(B r) = (1,2); u + = (2,2)
    CHECK(testing::close(out[0], 2.0, 1e-12));
    CHECK(testing::close(out[1], 2.0, 1e-12));
}

TEST_CASE("restrict_level: all-zero operators give zero outputs") {
    const auto [u0, f_next] =
        restrict_level(Vector{1.0, 1.0}, Vector{3.0, 3.0}, Matrix(1, 2), Vector{0.0},
                       Matrix(1, 2), Vector{0.0}, Matrix::identity(2), Vector{0, 0},
                       Matrix(1, 1), Vector{0.0});
    CHECK(u0 == Vector{0.0});
    CHECK(f_next == Vector{0.0});
}

TEST_CASE("restrict_level hand oracle: ones operators, I_l = 2 -> 1") {
    // u0 = [1 1]*(1,1) = 2; residual = (3,3) - (1,1) = (2,2); f' = 4 + 1*2 = 6
    const auto [u0, f_next] =
        restrict_level(Vector{1.0, 1.0}, Vector{3.0, 3.0}, mat(1, 2, {1, 1}), Vector{0.0},
                       mat(1, 2, {1, 1}), Vector{0.0}, Matrix::identity(2), Vector{0, 0},
                       mat(1, 1, {1}), Vector{0.0});
    CHECK(u0.size() == 1);
    CHECK(f_next.size() == 1);
    CHECK(testing::close(u0[0], 2.0, 1e-12));
    CHECK(testing::close(f_next[0], 6.0, 1e-12));
}

TEST_CASE("prolongate: no coarse delta or zero Pi returns u unchanged") {
    const Vector u{4.0, -1.0};
    CHECK(prolongate(u, Vector{2.5}, Vector{2.5}, mat(2, 1, {1, 2}), Vector{0, 0}) == u);
    CHECK(prolongate(u, Vector{9.0}, Vector{2.5}, Matrix(2, 1), Vector{0, 0}) == u);
}

TEST_CASE("prolongate hand oracle: delta=(3), Pi column (1,2)") {
    const Vector out =
        prolongate(Vector{1.0, 1.0}, Vector{5.0}, Vector{2.0}, mat(2, 1, {1, 2}), Vector{0, 0});
    CHECK(testing::close(out[0], 4.0, 1e-12));
    CHECK(testing::close(out[1], 7.0, 1e-12));
}

TEST_CASE("forward: all-zero parameters give zero output") {
    ModelConfig cfg = small_cfg(Variant::FvMgnet, 8, 4, 2, {1, 1});
    ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, 1});
    for (Matrix& m : p.set.slots) m.data.assign(m.data.size(), 0.0);
    const Vector y = forward(p, testing::random_input(8, 5));
    CHECK(y == Vector{0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("forward: output length is O for the benchmark input lengths") {
    for (std::size_t I : {96u, 192u, 336u, 720u}) {
        ModelConfig cfg = small_cfg(Variant::FvMgnet, I, 24, 3, {1, 1, 1});
        ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, 2});
        CHECK(forward(p, testing::random_input(I, 3)).size() == 24);
    }
}

TEST_CASE("FV-MgNet at J=1 equals Residual given identical parameters") {
    ModelConfig fv = small_cfg(Variant::FvMgnet, 12, 6, 1, {2});
    ModelConfig res = small_cfg(Variant::Residual, 12, 6, 1, {2});
    const InitSpec init{InitSpec::Scheme::UniformFanIn, 17};
    ModelParams pf = make_params(fv, init);
    ModelParams pr = make_params(res, init);
    REQUIRE(pf.set.scalar_count() == pr.set.scalar_count());
    const Vector x = testing::random_input(12, 21);
    CHECK(forward(pf, x) == forward(pr, x));
}

TEST_CASE("param_count: residual I=8 O=4 nu=1 hand count is 272") {
    ModelConfig cfg = small_cfg(Variant::Residual, 8, 4, 1, {1});
    CHECK(param_count(cfg) == 272);
    ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, 1});
    CHECK(p.set.scalar_count() == 272);
}

TEST_CASE("param_count analytic formula matches runtime enumeration on random configs") {
    Rng rng(99);
    int built = 0;
    while (built < 20) {
        ModelConfig cfg;
        const int v = static_cast<int>(rng.below(3));
        cfg.variant = v == 0 ? Variant::FvMgnet
                             : (v == 1 ? Variant::BackslashMgnet : Variant::Residual);
        cfg.grids = cfg.variant == Variant::Residual ? 1 : 1 + rng.below(4);
        const std::size_t mult = std::size_t{1} << (cfg.grids - 1);
        cfg.input_len = mult * (1 + rng.below(12));
        cfg.output_len = 1 + rng.below(24);
        cfg.smoothing_iters.clear();
        for (std::size_t l = 0; l < cfg.grids; ++l)
            cfg.smoothing_iters.push_back(1 + rng.below(4));
        cfg.op_a = rng.below(2) ? OpChoice::Conv : OpChoice::Fc;
        cfg.op_b = rng.below(2) ? OpChoice::Conv : OpChoice::Fc;
        ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, 55});
        CHECK(param_count(cfg) == p.set.scalar_count());
        ++built;
    }
}

TEST_CASE("fv-mgnet is smaller than residual at equal total smoothing work") {
    // shipped default shape: J=3, nu=(3,3,3) vs single-grid residual with
    // nu = 15 (3 down x 3 levels + 3 up x 2 levels)
    ModelConfig fv = small_cfg(Variant::FvMgnet, 96, 96, 3, {3, 3, 3});
    ModelConfig res = small_cfg(Variant::Residual, 96, 96, 1, {15});
    CHECK(param_count(fv) < param_count(res));
}

TEST_CASE("config invariants: divisibility, residual grids, iteration counts") {
    CHECK_THROWS_AS(small_cfg(Variant::FvMgnet, 50, 8, 3, {1, 1, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(small_cfg(Variant::FvMgnet, 100, 8, 4, {1, 1, 1, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(small_cfg(Variant::Residual, 16, 8, 2, {1, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(small_cfg(Variant::FvMgnet, 16, 8, 2, {1, 0}).validate(), ConfigError);
    CHECK_THROWS_AS(small_cfg(Variant::FvMgnet, 16, 8, 1, {1, 1}).validate(), ConfigError);
    CHECK_NOTHROW(small_cfg(Variant::FvMgnet, 60, 24, 3, {3, 3, 3}).validate());
    // 100 is divisible by 2^(3-1): levels 100/50/25 are all integral
    CHECK_NOTHROW(small_cfg(Variant::FvMgnet, 100, 8, 3, {1, 1, 1}).validate());
}

TEST_CASE("monotone level sizes: each exactly half the previous") {
    ModelConfig cfg = small_cfg(Variant::FvMgnet, 96, 24, 4, {1, 1, 1, 1});
    for (std::size_t l = 1; l < cfg.grids; ++l)
        CHECK(cfg.level_len(l) == 2 * cfg.level_len(l + 1));
}

TEST_CASE("feature non-negativity on the first-level down phase") {
    ModelConfig cfg = small_cfg(Variant::FvMgnet, 16, 8, 3, {3, 2, 1});
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, seed});
        ForwardTrace trace;
        forward_traced(p, testing::random_input(16, seed), trace);
        REQUIRE(trace.u_level1_iters.size() == 3);
        const Vector* prev = nullptr;
        for (const Vector& u : trace.u_level1_iters) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                CHECK(u[i] >= 0.0);
                if (prev) CHECK(u[i] >= (*prev)[i]);
            }
            prev = &u;
        }
    }
}

TEST_CASE("phase isolation: down-phase states identical with and without up phase") {
    ModelConfig cfg = small_cfg(Variant::FvMgnet, 16, 8, 3, {2, 1, 1});
    ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, 31});
    const Vector x = testing::random_input(16, 32);
    ForwardTrace full, down_only;
    forward_traced(p, x, full, false);
    forward_traced(p, x, down_only, true);
    REQUIRE(full.f_levels.size() == down_only.f_levels.size());
    for (std::size_t i = 0; i < full.f_levels.size(); ++i)
        CHECK(full.f_levels[i] == down_only.f_levels[i]);
    REQUIRE(full.u_down.size() == down_only.u_down.size());
    for (std::size_t i = 0; i < full.u_down.size(); ++i)
        CHECK(full.u_down[i] == down_only.u_down[i]);
    REQUIRE(full.u0_coarse.size() == down_only.u0_coarse.size());
    for (std::size_t i = 0; i < full.u0_coarse.size(); ++i)
        CHECK(full.u0_coarse[i] == down_only.u0_coarse[i]);
}

TEST_CASE("forward is deterministic across repeated runs") {
    ModelConfig cfg = small_cfg(Variant::FvMgnet, 32, 16, 2, {2, 2});
    ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, 12});
    const Vector x = testing::random_input(32, 13);
    const Vector y0 = forward(p, x);
    for (int i = 0; i < 5; ++i) CHECK(forward(p, x) == y0);
}

TEST_CASE("structural: per level nu_l distinct B plus one shared A down and one Abar up") {
    ModelConfig cfg = small_cfg(Variant::FvMgnet, 32, 8, 3, {3, 2, 1});
    ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, 2});
    REQUIRE(p.a.size() == 3);
    REQUIRE(p.b.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(p.b[l].size() == cfg.smoothing_iters[l]);
        std::vector<int> seen;
        for (const auto& h : p.b[l]) {
            for (int s : seen) CHECK(s != h.w);  // distinct slots
            seen.push_back(h.w);
            CHECK(h.w != p.a[l].w);
        }
    }
    REQUIRE(p.abar.size() == 2);
    REQUIRE(p.bbar.size() == 2);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(p.abar[l].w != p.a[l].w);  // up-phase operators are distinct parameters
        CHECK(p.bbar[l].size() == cfg.smoothing_iters[l]);
    }
}

TEST_CASE("gradient check across variants and operator choices (small)") {
    struct Case {
        Variant variant;
        OpChoice op;
    };
    for (const Case c : {Case{Variant::FvMgnet, OpChoice::Fc},
                         Case{Variant::BackslashMgnet, OpChoice::Conv},
                         Case{Variant::Residual, OpChoice::Fc}}) {
        ModelConfig cfg;
        cfg.variant = c.variant;
        cfg.grids = c.variant == Variant::Residual ? 1 : 3;
        cfg.input_len = 16;
        cfg.output_len = 8;
        cfg.smoothing_iters.assign(cfg.grids, 1);
        cfg.op_a = cfg.op_b = c.op;
        auto found = testing::find_margin_case(cfg, 1e-3);
        REQUIRE(found.has_value());
        auto rep = testing::fd_check(found->params, found->input);
        CAPTURE(to_string(c.variant));
        CAPTURE(rep.worst_slot);
        CHECK(rep.max_rel < 1e-4);
    }
}

TEST_CASE("double-activation form applies the inner relu") {
    // with f - Au negative everywhere, the double-activation update is a no-op
    // while the single-activation form can still move u
    const Vector u{0.0, 0.0};
    const Vector f{-1.0, -2.0};
    const Matrix negB = mat(2, 2, {-1, 0, 0, -1});
    const Vector single = smooth_step(u, f, Matrix::identity(2), {0, 0}, negB, {0, 0}, false);
    const Vector dbl = smooth_step(u, f, Matrix::identity(2), {0, 0}, negB, {0, 0}, true);
    CHECK(single == Vector{1.0, 2.0});  // relu(-B f) with B = -I
    CHECK(dbl == Vector{0.0, 0.0});     // inner relu zeroes the residual first
}
