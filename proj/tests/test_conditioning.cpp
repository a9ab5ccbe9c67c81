#include <doctest.h>

#include <random>

#include "mvtryon/conditioning/encoders.hpp"
#include "mvtryon/conditioning/joint_attention.hpp"
#include "mvtryon/conditioning/selection.hpp"
#include "mvtryon/errors.hpp"
#include "mvtryon/numerics/ops.hpp"
#include "support/cond_fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/oracle.hpp"
#include "support/random.hpp"

using namespace mvt;
using namespace mvt::cond;
using testing::max_abs_diff;
using testing::random_tensor;

namespace {

Tensor oracle_stage(const nn::ParamStore& p, const std::string& n, const Tensor& x) {
    return oracle::avg_pool2(
        oracle::gelu(oracle::add_channel(oracle::conv2d(x, p.get(n + ".weight"), 1, 1), p.get(n + ".bias"))));
}

nn::ParamStore encoder_params(std::uint64_t seed) {
    nn::LayerSpec spec;
    declare_global_encoder(spec, "g");
    declare_local_encoder(spec, "l");
    nn::ParamStore p = nn::init_params(spec, seed);
    // Non-zero biases so the oracles exercise them.
    std::mt19937_64 rng(seed);
    for (auto& [name, t] : p)
        if (name.ends_with(".bias"))
            for (auto& v : t.storage()) v = std::uniform_real_distribution<double>(-0.2, 0.2)(rng);
    return p;
}

pose::PoseEmbedding embed(Tape& t, const Tensor& tokens, std::size_t h, std::size_t w) {
    return {t.constant(tokens), h, w};
}

}  // namespace

TEST_CASE("global_encode") {
    nn::ParamStore p = encoder_params(3);
    std::mt19937_64 rng(1);
    Tensor img = random_tensor({3, 32, 16}, rng);
    SUBCASE("shape and determinism") {
        Tape t;
        nn::Binder b(t, p);
        Var a = global_encode(t.constant(img), b, "g");
        Var c = global_encode(t.constant(img), b, "g");
        CHECK(a.shape() == Shape{1, 32});
        CHECK(a.value() == c.value());
        CHECK(global_encode(t.constant(Tensor({3, 64, 48})), b, "g").shape() == Shape{1, 32});
    }
    SUBCASE("matches composed oracle") {
        Tape t;
        nn::Binder b(t, p);
        Tensor got = global_encode(t.constant(img), b, "g").value();
        Tensor x = img;
        for (int i = 0; i < 4; ++i) x = oracle_stage(p, "g.stage" + std::to_string(i), x);
        Tensor pooled({1, x.dim(0)});
        const std::size_t hw = x.dim(1) * x.dim(2);
        for (std::size_t c = 0; c < x.dim(0); ++c) {
            for (std::size_t i = 0; i < hw; ++i) pooled.at(0, c) += x[c * hw + i];
            pooled.at(0, c) /= static_cast<double>(hw);
        }
        Tensor want = oracle::linear(pooled, p.get("g.proj.weight"), &p.get("g.proj.bias"));
        CHECK(max_abs_diff(got, want) <= 1e-10);
    }
    SUBCASE("contract") {
        Tape t;
        nn::Binder b(t, p);
        CHECK_THROWS_AS(global_encode(t.constant(Tensor({3, 24, 16})), b, "g"), ContractError);
        CHECK_THROWS_AS(global_encode(t.constant(Tensor({1, 32, 16})), b, "g"), ContractError);
    }
}

TEST_CASE("local_encode") {
    nn::ParamStore p = encoder_params(4);
    std::mt19937_64 rng(2);
    SUBCASE("levels coarse to fine with 4x tokens per step") {
        Tape t;
        nn::Binder b(t, p);
        LocalFeaturePyramid pyr = local_encode(t.constant(random_tensor({3, 64, 48}, rng)), b, "l", 2);
        REQUIRE(pyr.levels.size() == 2);
        CHECK(pyr.levels[0].tokens.shape() == Shape{48, 16});
        CHECK(pyr.levels[1].tokens.shape() == Shape{192, 16});
        CHECK(pyr.levels[1].h == 16);
        CHECK(pyr.levels[1].w == 12);
        CHECK(pyr.levels[1].tokens.shape()[0] == 4 * pyr.levels[0].tokens.shape()[0]);
    }
    SUBCASE("zero image with zero biases gives zero tokens") {
        nn::LayerSpec spec;
        declare_local_encoder(spec, "l");
        nn::ParamStore z = nn::init_params(spec, 5);
        Tape t;
        nn::Binder b(t, z);
        for (const auto& lvl : local_encode(t.constant(Tensor({3, 32, 24})), b, "l", 2).levels)
            for (double v : lvl.tokens.value().storage()) CHECK(v == 0.0);
    }
    SUBCASE("matches composed oracle") {
        Tensor img = random_tensor({3, 32, 16}, rng);
        Tape t;
        nn::Binder b(t, p);
        LocalFeaturePyramid pyr = local_encode(t.constant(img), b, "l", 2);
        Tensor fine = oracle_stage(p, "l.level0", oracle_stage(p, "l.stem", img));
        Tensor coarse = oracle_stage(p, "l.level1", fine);
        CHECK(max_abs_diff(pyr.levels[1].tokens.value(), oracle::to_tokens(fine)) <= 1e-10);
        CHECK(max_abs_diff(pyr.levels[0].tokens.value(), oracle::to_tokens(coarse)) <= 1e-10);
    }
    SUBCASE("contract") {
        Tape t;
        nn::Binder b(t, p);
        CHECK_THROWS_AS(local_encode(t.constant(Tensor({3, 36, 24})), b, "l", 2), ContractError);
    }
}

TEST_CASE("soft_select") {
    SUBCASE("two-token instance matches the scripted oracle") {
        testing::TwoTokenSelection fx;
        Tape t;
        nn::Binder b(t, fx.params);
        SoftSelectionBlock blk = bind_soft_selection(b, "ss");
        Tensor got = soft_select(t.constant(fx.front_feat), t.constant(fx.back_feat), embed(t, fx.person, 2, 1),
                                 embed(t, fx.front_pose, 2, 1), embed(t, fx.back_pose, 2, 1), blk)
                         .value();
        CHECK(max_abs_diff(got, fx.expected()) <= 1e-12);
    }

    nn::LayerSpec spec;
    declare_soft_selection(spec, "ss", 5, 6, 4);
    nn::ParamStore p = nn::init_params(spec, 8);
    std::mt19937_64 rng(9);

    SUBCASE("single garment token copies the projected features") {
        Tape t;
        nn::Binder b(t, p);
        SoftSelectionBlock blk = bind_soft_selection(b, "ss");
        Tensor cf = random_tensor({1, 6}, rng), cb = random_tensor({1, 6}, rng);
        Tensor out = soft_select(t.constant(cf), t.constant(cb), embed(t, random_tensor({3, 5}, rng), 3, 1),
                                 embed(t, random_tensor({1, 5}, rng), 1, 1), embed(t, random_tensor({1, 5}, rng), 1, 1),
                                 blk)
                         .value();
        Tensor pf = oracle::linear(cf, p.get("ss.garment_feat.weight"), &p.get("ss.garment_feat.bias"));
        Tensor pb = oracle::linear(cb, p.get("ss.garment_feat.weight"), &p.get("ss.garment_feat.bias"));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t c = 0; c < 4; ++c) {
                CHECK(out.at(i, c) == doctest::Approx(pf.at(0, c)).epsilon(1e-15));
                CHECK(out.at(i, 4 + c) == doctest::Approx(pb.at(0, c)).epsilon(1e-15));
            }
    }
    SUBCASE("identical views give identical halves") {
        Tape t;
        nn::Binder b(t, p);
        SoftSelectionBlock blk = bind_soft_selection(b, "ss");
        Tensor c = random_tensor({6, 6}, rng);
        auto g = embed(t, random_tensor({6, 5}, rng), 3, 2);
        Tensor out = soft_select(t.constant(c), t.constant(c), embed(t, random_tensor({4, 5}, rng), 2, 2), g, g, blk).value();
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < 4; ++k) CHECK(out.at(i, k) == out.at(i, 4 + k));
    }
    SUBCASE("weights rows sum to one") {
        Tape t;
        nn::Binder b(t, p);
        SoftSelectionBlock blk = bind_soft_selection(b, "ss");
        Tensor w = selection_weights(embed(t, random_tensor({7, 5}, rng, -3, 3), 7, 1),
                                     embed(t, random_tensor({6, 5}, rng, -3, 3), 3, 2), blk)
                       .value();
        for (std::size_t i = 0; i < 7; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < 6; ++j) s += w.at(i, j);
            CHECK(std::abs(s - 1.0) <= 1e-6);
        }
    }
    SUBCASE("permuting garment tokens with their pose tokens leaves the output unchanged") {
        Tensor cf = random_tensor({6, 6}, rng), cb = random_tensor({6, 6}, rng);
        Tensor ef = random_tensor({6, 5}, rng), eb = random_tensor({6, 5}, rng), eh = random_tensor({4, 5}, rng);
        std::vector<std::size_t> perm{2, 5, 0, 3, 1, 4};
        auto permute = [&](const Tensor& x) {
            Tensor y(x.shape());
            for (std::size_t i = 0; i < x.dim(0); ++i)
                for (std::size_t j = 0; j < x.dim(1); ++j) y.at(i, j) = x.at(perm[i], j);
            return y;
        };
        Tape t;
        nn::Binder b(t, p);
        SoftSelectionBlock blk = bind_soft_selection(b, "ss");
        Tensor a = soft_select(t.constant(cf), t.constant(cb), embed(t, eh, 2, 2), embed(t, ef, 3, 2),
                               embed(t, eb, 3, 2), blk)
                       .value();
        Tensor c = soft_select(t.constant(permute(cf)), t.constant(cb), embed(t, eh, 2, 2), embed(t, permute(ef), 3, 2),
                               embed(t, eb, 3, 2), blk)
                       .value();
        CHECK(max_abs_diff(a, c) <= 1e-12);
    }
    SUBCASE("scaling both pose projections keeps each row's argmax") {
        testing::TwoTokenSelection fx;
        Tensor eh = random_tensor({5, 2}, rng), ef = random_tensor({4, 2}, rng);
        auto argmaxes = [&](double s) {
            for (const char* n : {"ss.person_pose.weight", "ss.garment_pose.weight"}) fx.params.get(n) = testing::identity(2);
            for (const char* n : {"ss.person_pose.weight", "ss.garment_pose.weight"})
                for (auto& v : fx.params.get(n).storage()) v *= s;
            Tape t;
            nn::Binder b(t, fx.params);
            Tensor w = selection_weights(embed(t, eh, 5, 1), embed(t, ef, 4, 1), bind_soft_selection(b, "ss")).value();
            std::vector<std::size_t> am;
            for (std::size_t i = 0; i < 5; ++i) {
                std::size_t best = 0;
                for (std::size_t j = 1; j < 4; ++j)
                    if (w.at(i, j) > w.at(i, best)) best = j;
                am.push_back(best);
            }
            return am;
        };
        const auto base = argmaxes(1.0);
        for (double s : {0.3, 2.0, 7.0}) CHECK(argmaxes(s) == base);
    }
    SUBCASE("token count mismatch") {
        Tape t;
        nn::Binder b(t, p);
        SoftSelectionBlock blk = bind_soft_selection(b, "ss");
        CHECK_THROWS_AS(soft_select(t.constant(random_tensor({6, 6}, rng)), t.constant(random_tensor({6, 6}, rng)),
                                    embed(t, random_tensor({4, 5}, rng), 2, 2), embed(t, random_tensor({4, 5}, rng), 2, 2),
                                    embed(t, random_tensor({6, 5}, rng), 3, 2), blk),
                        ContractError);
    }
    SUBCASE("concat_features places both projections side by side") {
        Tape t;
        nn::Binder b(t, p);
        SoftSelectionBlock blk = bind_soft_selection(b, "ss");
        Tensor cf = random_tensor({6, 6}, rng), cb = random_tensor({6, 6}, rng);
        Tensor out = concat_features(t.constant(cf), t.constant(cb), blk).value();
        CHECK(out.shape() == Shape{6, 8});
        Tensor pb = oracle::linear(cb, p.get("ss.garment_feat.weight"), &p.get("ss.garment_feat.bias"));
        CHECK(out.at(3, 5) == doctest::Approx(pb.at(3, 1)).epsilon(1e-14));
    }
}

TEST_CASE("soft selection gradients match finite differences") {
    nn::LayerSpec spec;
    declare_soft_selection(spec, "ss", 3, 4, 2);
    nn::ParamStore p = nn::init_params(spec, 10);
    std::mt19937_64 rng(11);
    Tensor cf = random_tensor({4, 4}, rng), cb = random_tensor({4, 4}, rng);
    Tensor eh = random_tensor({3, 3}, rng), ef = random_tensor({4, 3}, rng), eb = random_tensor({4, 3}, rng);
    Tensor proj = random_tensor({3, 4}, rng);
    std::vector<Tensor*> params;
    for (auto& [_, t] : p) params.push_back(&t);
    auto r = testing::grad_check(params, [&](Tape& t) {
        nn::Binder b(t, p);
        SoftSelectionBlock blk = bind_soft_selection(b, "ss");
        Var out = soft_select(t.constant(cf), t.constant(cb), embed(t, eh, 3, 1), embed(t, ef, 2, 2), embed(t, eb, 2, 2), blk);
        return sum(mul(out, t.constant(proj)));
    });
    CHECK(r.max_rel_err <= 1e-4);
}

TEST_CASE("joint_attention") {
    std::mt19937_64 rng(12);
    SUBCASE("matches scripted evaluation on a tiny instance") {
        nn::ParamStore p = testing::joint_attention_params(4, 5, 4, 13);
        Tensor f = random_tensor({2, 4}, rng), cg = random_tensor({1, 5}, rng), cl = random_tensor({3, 4}, rng);
        Tape t;
        nn::Binder b(t, p);
        Tensor got = joint_attention(t.constant(f), t.constant(cg), t.constant(cl), bind_joint_attention(b, "ja")).value();
        CHECK(max_abs_diff(got, testing::joint_attention_oracle(p, f, cg, cl)) <= 1e-12);
    }
    SUBCASE("zero fusion reduces to the global branch and ignores local features") {
        nn::ParamStore p = testing::joint_attention_params(4, 5, 4, 14);
        for (auto& v : p.get("ja.fusion").storage()) v = 0.0;
        Tensor f = random_tensor({3, 4}, rng), cg = random_tensor({1, 5}, rng);
        Tape t;
        nn::Binder b(t, p);
        auto blk = bind_joint_attention(b, "ja");
        auto tr = joint_attention_trace(t.constant(f), t.constant(cg), t.constant(random_tensor({3, 4}, rng)), blk);
        Tensor expect = oracle::add(tr.residual.value(), tr.global_branch.value());
        CHECK(tr.out.value() == expect);
        for (std::size_t k = 0; k < 5; ++k) {
            Tensor other = random_tensor({2 + k, 4}, rng, -50, 50);
            CHECK(joint_attention(t.constant(f), t.constant(cg), t.constant(other), blk).value() == tr.out.value());
        }
    }
    SUBCASE("duplicated branches with unit fusion give twice one branch") {
        nn::ParamStore p = testing::joint_attention_params(4, 4, 4, 15);
        for (const char* s : {"q", "k", "v"})
            p.get(std::string("ja.local_") + s + ".weight") = p.get(std::string("ja.global_") + s + ".weight");
        for (auto& v : p.get("ja.fusion").storage()) v = 1.0;
        Tensor f = random_tensor({3, 4}, rng), c = random_tensor({2, 4}, rng);
        Tape t;
        nn::Binder b(t, p);
        auto tr = joint_attention_trace(t.constant(f), t.constant(c), t.constant(c), bind_joint_attention(b, "ja"));
        const Tensor& out = tr.out.value();
        const Tensor& h = tr.residual.value();
        const Tensor& g = tr.global_branch.value();
        double m = 0;
        for (std::size_t i = 0; i < out.numel(); ++i) m = std::max(m, std::abs((out[i] - h[i]) - 2.0 * g[i]));
        CHECK(m <= 1e-12);
    }
    SUBCASE("fusion length must match the feature width") {
        nn::ParamStore p = testing::joint_attention_params(4, 5, 4, 16);
        p.get("ja.fusion") = Tensor({3});
        Tape t;
        nn::Binder b(t, p);
        CHECK_THROWS_AS(joint_attention(t.constant(Tensor({2, 4})), t.constant(Tensor({1, 5})),
                                        t.constant(Tensor({3, 4})), bind_joint_attention(b, "ja")),
                        ContractError);
    }
    SUBCASE("fusion starts at zero") {
        nn::LayerSpec spec;
        declare_joint_attention(spec, "ja", 6, 3, 6);
        nn::ParamStore fresh = nn::init_params(spec, 1);
        for (double v : fresh.get("ja.fusion").storage()) CHECK(v == 0.0);
    }
}

TEST_CASE("joint attention gradients match finite differences") {
    nn::ParamStore p = testing::joint_attention_params(4, 3, 4, 17);
    std::mt19937_64 rng(18);
    Tensor f = random_tensor({3, 4}, rng), cg = random_tensor({2, 3}, rng), cl = random_tensor({5, 4}, rng);
    Tensor proj = random_tensor({3, 4}, rng);
    std::vector<Tensor*> params;
    for (auto& [_, t] : p) params.push_back(&t);
    auto r = testing::grad_check(params, [&](Tape& t) {
        nn::Binder b(t, p);
        Var out = joint_attention(t.constant(f), t.constant(cg), t.constant(cl), bind_joint_attention(b, "ja"));
        return sum(mul(out, t.constant(proj)));
    });
    CHECK(r.max_rel_err <= 1e-4);
}
