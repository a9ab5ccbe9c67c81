#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "mvtryon/errors.hpp"
#include "mvtryon/nn/checkpoint.hpp"
#include "mvtryon/nn/layers.hpp"
#include "mvtryon/nn/optim.hpp"
#include "mvtryon/numerics/ops.hpp"
#include "support/gradcheck.hpp"
#include "support/oracle.hpp"
#include "support/random.hpp"

using namespace mvt;
using namespace mvt::nn;
using mvt::testing::random_tensor;

namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.shape() == b.shape());
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "mvtryon_test_nn";
    std::filesystem::create_directories(dir);
    return dir / name;
}

LayerSpec small_spec() {
    LayerSpec spec;
    spec.linear("enc.fc", 5, 4);
    spec.conv("enc.conv", 3, 2, 3);
    spec.layernorm("enc.norm", 4);
    spec.linear("head", 4, 2, false);
    return spec;
}

}  // namespace

TEST_CASE("init_params is deterministic and zero-initializes biases") {
    ParamStore a = init_params(small_spec(), 42);
    ParamStore b = init_params(small_spec(), 42);
    ParamStore c = init_params(small_spec(), 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.size() == 7);
    for (const auto& [name, t] : a) {
        CHECK(t.requires_grad());
        if (name.ends_with(".bias"))
            for (double v : t.storage()) CHECK(v == 0.0);
    }
    for (double v : a.get("enc.norm.gain").storage()) CHECK(v == 1.0);
    const double bound = 1.0 / std::sqrt(3.0 * 9.0);
    for (double v : a.get("enc.conv.weight").storage()) CHECK(std::abs(v) <= bound);
}

TEST_CASE("init_params value of a parameter does not depend on its neighbours") {
    LayerSpec one;
    one.linear("x", 4, 3);
    LayerSpec two;
    two.linear("other", 2, 2);
    two.linear("x", 4, 3);
    CHECK(init_params(one, 9).get("x.weight") == init_params(two, 9).get("x.weight"));
}

TEST_CASE("init_params rejects duplicate names") {
    LayerSpec spec;
    spec.linear("a", 2, 2);
    spec.linear("a", 2, 2);
    CHECK_THROWS_AS(init_params(spec, 1), ContractError);
}

TEST_CASE("uniform init sample mean of a 256x256 layer is within 3 sigma of zero") {
    LayerSpec spec;
    spec.linear("big", 256, 256);
    ParamStore s = init_params(spec, 5);
    const auto& w = s.get("big.weight").storage();
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w.size());
    // Uniform(-b, b) has variance b^2/3.
    const double b = 1.0 / 16.0;
    const double sigma = std::sqrt(b * b / 3.0 / static_cast<double>(w.size()));
    CHECK(std::abs(mean) < 3.0 * sigma);
}

TEST_CASE("linear") {
    std::mt19937_64 rng(3);
    SUBCASE("identity weight, zero bias") {
        ParamStore s;
        Tensor eye({3, 3});
        for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
        s.add("l.weight", eye);
        s.add("l.bias", Tensor({3}));
        Tape t;
        Binder bind(t, s);
        Tensor x = random_tensor({4, 3}, rng);
        CHECK(linear(bind_linear(bind, "l"), t.constant(x)).value() == x);
    }
    SUBCASE("zero input broadcasts the bias") {
        ParamStore s;
        s.add("l.weight", random_tensor({2, 3}, rng));
        s.add("l.bias", Tensor({2}, {0.5, -1.5}));
        Tape t;
        Binder bind(t, s);
        Tensor y = linear(bind_linear(bind, "l"), t.constant(Tensor({4, 3}))).value();
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(y.at(i, 0) == 0.5);
            CHECK(y.at(i, 1) == -1.5);
        }
    }
    SUBCASE("random case matches matmul+add oracle") {
        ParamStore s;
        Tensor w = random_tensor({4, 5}, rng), b = random_tensor({4}, rng), x = random_tensor({6, 5}, rng);
        s.add("l.weight", w);
        s.add("l.bias", b);
        Tape t;
        Binder bind(t, s);
        Tensor y = linear(bind_linear(bind, "l"), t.constant(x)).value();
        CHECK(max_abs_diff(y, oracle::linear(x, w, &b)) <= 1e-12);
    }
    SUBCASE("higher-rank input keeps leading dims") {
        ParamStore s;
        s.add("l.weight", random_tensor({2, 5}, rng));
        Tape t;
        Binder bind(t, s);
        CHECK(linear(bind_linear(bind, "l"), t.constant(random_tensor({3, 4, 5}, rng))).shape() == Shape{3, 4, 2});
    }
    SUBCASE("trailing dim mismatch") {
        ParamStore s;
        s.add("l.weight", random_tensor({2, 5}, rng));
        Tape t;
        Binder bind(t, s);
        CHECK_THROWS_AS(linear(bind_linear(bind, "l"), t.constant(Tensor({3, 4}))), DimensionError);
    }
}

TEST_CASE("attention") {
    std::mt19937_64 rng(4);
    Tape t;
    SUBCASE("single key returns its value row") {
        Tensor v = random_tensor({1, 3}, rng);
        Tensor y = attention(t.constant(random_tensor({5, 2}, rng)), t.constant(random_tensor({1, 2}, rng)),
                             t.constant(v))
                       .value();
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(y.at(i, j) == doctest::Approx(v.at(0, j)).epsilon(1e-15));
    }
    SUBCASE("orthonormal Q=K at scale 50 selects the matching value row") {
        Tensor q({3, 3});
        for (int i = 0; i < 3; ++i) q.at(i, i) = 50.0;
        Tensor v = random_tensor({3, 2}, rng);
        Tensor y = attention(t.constant(q), t.constant(q), t.constant(v)).value();
        // Off-diagonal weights are exp(-2500/sqrt(3)) relative, far below 1e-12.
        CHECK(max_abs_diff(y, v) <= 1e-12);
    }
    SUBCASE("identical keys average the values") {
        Tensor krow = random_tensor({1, 2}, rng);
        Tensor k({4, 2});
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 2; ++j) k.at(i, j) = krow.at(0, j);
        Tensor v = random_tensor({4, 3}, rng);
        Tensor y = attention(t.constant(random_tensor({2, 2}, rng)), t.constant(k), t.constant(v)).value();
        for (std::size_t c = 0; c < 3; ++c) {
            double m = 0.0;
            for (std::size_t i = 0; i < 4; ++i) m += v.at(i, c) / 4.0;
            CHECK(std::abs(y.at(0, c) - m) <= 1e-12);
            CHECK(std::abs(y.at(1, c) - m) <= 1e-12);
        }
    }
    SUBCASE("matches element-wise oracle") {
        Tensor q = random_tensor({3, 4}, rng), k = random_tensor({5, 4}, rng), v = random_tensor({5, 2}, rng);
        CHECK(max_abs_diff(attention(t.constant(q), t.constant(k), t.constant(v)).value(),
                           oracle::attention(q, k, v)) <= 1e-12);
    }
    SUBCASE("permuting key/value pairs leaves the output unchanged") {
        Tensor q = random_tensor({3, 4}, rng), k = random_tensor({5, 4}, rng), v = random_tensor({5, 2}, rng);
        std::vector<std::size_t> perm{3, 0, 4, 1, 2};
        Tensor kp(k.shape()), vp(v.shape());
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 4; ++j) kp.at(i, j) = k.at(perm[i], j);
            for (std::size_t j = 0; j < 2; ++j) vp.at(i, j) = v.at(perm[i], j);
        }
        Tensor a = attention(t.constant(q), t.constant(k), t.constant(v)).value();
        Tensor b = attention(t.constant(q), t.constant(kp), t.constant(vp)).value();
        CHECK(max_abs_diff(a, b) <= 1e-12);
    }
    SUBCASE("weight rows sum to one") {
        Tensor q = random_tensor({3, 4}, rng), k = random_tensor({5, 4}, rng);
        Tensor ones({5, 1}, 1.0);
        Tensor y = attention(t.constant(q), t.constant(k), t.constant(ones)).value();
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(y.at(i, 0) - 1.0) <= 1e-12);
    }
    SUBCASE("dimension mismatches") {
        CHECK_THROWS_AS(attention(t.constant(Tensor({2, 3})), t.constant(Tensor({4, 2})), t.constant(Tensor({4, 1}))),
                        DimensionError);
        CHECK_THROWS_AS(attention(t.constant(Tensor({2, 3})), t.constant(Tensor({4, 3})), t.constant(Tensor({5, 1}))),
                        DimensionError);
    }
}

TEST_CASE("linear and attention gradients match finite differences") {
    std::mt19937_64 rng(8);
    Tensor w = testing::random_param({3, 4}, rng), b = testing::random_param({3}, rng);
    Tensor x = testing::random_param({5, 4}, rng), kv = testing::random_param({6, 3}, rng);
    Tensor proj = random_tensor({5, 3}, rng);
    ParamStore s;
    auto r = testing::grad_check({&w, &b, &x, &kv}, [&](Tape& t) {
        LinearLayer l{t.leaf(w), t.leaf(b)};
        Var q = linear(l, t.leaf(x));
        Var k = t.leaf(kv);
        return sum(mul(attention(q, k, k), t.constant(proj)));
    });
    CHECK(r.max_rel_err <= 1e-4);
}

TEST_CASE("binder caches bindings and frozen binding blocks gradient") {
    ParamStore s = init_params(small_spec(), 1);
    {
        Tape t;
        Binder bind(t, s);
        Var a = bind("head.weight");
        Var b = bind("head.weight");
        CHECK(a.id() == b.id());
        t.backward(sum(add(a, b)));
        for (double g : s.get("head.weight").grad()) CHECK(g == 2.0);
    }
    s.zero_grad();
    {
        Tape t;
        Binder bind(t, s, true);
        Var a = bind("head.weight");
        CHECK_FALSE(a.requires_grad());
    }
    CHECK_FALSE(s.get("head.weight").has_grad());
    CHECK_THROWS_AS(s.get("missing"), ContractError);
}

TEST_CASE("checkpoint round trip is bitwise") {
    ParamStore s = init_params(small_spec(), 77);
    s.get("enc.fc.bias")[0] = -0.0;
    s.get("enc.fc.bias")[1] = 1e-308;
    auto path = temp_path("round.mvtc");
    save_checkpoint(s, path);
    ParamStore r = load_checkpoint(path);
    CHECK(r == s);
    for (const auto& [name, t] : s)
        CHECK(std::memcmp(t.storage().data(), r.get(name).storage().data(), t.numel() * 8) == 0);
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST_CASE("checkpoint record count matches parameter count") {
    ParamStore s = init_params(small_spec(), 2);
    auto path = temp_path("count.mvtc");
    save_checkpoint(s, path);

    // Independent walk over the file index.
    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
    auto u32 = [&](std::size_t at) {
        return static_cast<std::uint32_t>(bytes[at] | (bytes[at + 1] << 8) | (bytes[at + 2] << 16) |
                                          (static_cast<std::uint32_t>(bytes[at + 3]) << 24));
    };
    REQUIRE(std::string(bytes.begin(), bytes.begin() + 4) == "MVTC");
    CHECK(u32(4) == 1);
    std::size_t pos = 8, records = 0;
    while (pos < bytes.size()) {
        const std::uint32_t len = u32(pos);
        pos += 4 + len;
        const std::uint32_t rank = u32(pos);
        pos += 4;
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d, pos += 4) numel *= u32(pos);
        pos += numel * 8;
        ++records;
    }
    CHECK(pos == bytes.size());
    CHECK(records == s.size());
}

TEST_CASE("checkpoint format errors") {
    ParamStore s = init_params(small_spec(), 2);
    auto path = temp_path("bad.mvtc");
    save_checkpoint(s, path);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    auto write = [&](const std::string& b) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << b;
    };

    SUBCASE("magic") {
        std::string b = bytes;
        b[0] = 'X';
        write(b);
        CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    }
    SUBCASE("version") {
        std::string b = bytes;
        b[4] = 9;
        write(b);
        CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    }
    SUBCASE("truncated") {
        write(bytes.substr(0, bytes.size() - 3));
        CHECK_THROWS_AS(load_checkpoint(path), FormatError);
        write(bytes.substr(0, 6));
        CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    }
}

TEST_CASE("AdamW") {
    SUBCASE("zero learning rate leaves parameters bitwise unchanged") {
        ParamStore s = init_params(small_spec(), 3);
        ParamStore before = s;
        for (auto& [_, p] : s)
            for (double& g : p.ensure_grad()) g = 0.3;
        AdamW opt({.lr = 0.0});
        opt.step(s);
        opt.step(s);
        CHECK(s == before);
    }
    SUBCASE("first step moves each weight by lr against the gradient sign") {
        ParamStore s;
        s.add("w", Tensor({3}, {1.0, -2.0, 0.5}));
        auto g = s.get("w").ensure_grad();
        g[0] = 4.0;
        g[1] = -0.01;
        g[2] = 0.0;
        AdamW opt({.lr = 0.1, .weight_decay = 0.0});
        opt.step(s);
        // Bias-corrected m/sqrt(v) = sign(g) on step one.
        CHECK(s.get("w")[0] == doctest::Approx(0.9).epsilon(1e-6));
        CHECK(s.get("w")[1] == doctest::Approx(-1.9).epsilon(1e-5));
        CHECK(s.get("w")[2] == 0.5);
    }
    SUBCASE("decoupled weight decay shrinks weights with zero gradient") {
        ParamStore s;
        s.add("w", Tensor({1}, {2.0}));
        s.get("w").ensure_grad();
        AdamW opt({.lr = 0.1, .weight_decay = 0.5});
        opt.step(s);
        CHECK(s.get("w")[0] == doctest::Approx(2.0 * (1 - 0.05)));
    }
    SUBCASE("state round trip continues the same trajectory") {
        auto run = [](ParamStore& s, AdamW& opt, int steps, int offset) {
            for (int i = 0; i < steps; ++i) {
                for (auto& [_, p] : s) {
                    auto g = p.ensure_grad();
                    for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::sin(0.7 * (i + offset) + j);
                }
                opt.step(s);
            }
        };
        ParamStore a = init_params(small_spec(), 4), b = a;
        AdamW oa({.lr = 0.01}), ob({.lr = 0.01});
        run(a, oa, 5, 0);
        run(b, ob, 3, 0);
        auto path = temp_path("opt.mvtc");
        ob.save_state(path);
        AdamW oc({.lr = 0.01});
        oc.load_state(path);
        CHECK(oc.steps() == 3);
        run(b, oc, 2, 3);
        CHECK(a == b);
    }
}
