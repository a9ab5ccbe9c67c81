#include "mvtryon/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mvtryon/errors.hpp"
#include "mvtryon/numerics/gemm.hpp"

namespace mvt {

namespace {

using Grad = std::vector<double>;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

Tape& tape_of(std::initializer_list<Var> vars) {
    Tape* tape = nullptr;
    for (const Var& v : vars) {
        if (!v.valid()) throw ContractError("operation on an unbound Var");
        if (tape && v.tape() != tape) throw ContractError("operands recorded on different tapes");
        tape = v.tape();
    }
    return *tape;
}

bool any_grad(std::initializer_list<Var> vars) {
    return std::any_of(vars.begin(), vars.end(), [](const Var& v) { return v.requires_grad(); });
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
}

void require_rank(const char* op, const Var& a, std::size_t rank) {
    if (a.value().rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                             shape_str(a.shape()));
    }
}

// Splits a shape around `axis` into (outer, axis length, inner).
struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    r.len = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

template <typename F>
Var unary(Var a, Tensor out, F&& local_grad) {
    Tape& tp = tape_of({a});
    const std::size_t ia = a.id();
    return tp.record(std::move(out), a.requires_grad(), [ia, local_grad](Tape& t, std::size_t, const Grad& g) {
        Grad& ga = t.grad(ia);
        const auto& x = t.value(ia).storage();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * local_grad(x[i]);
    });
}

void im2col(const double* x, std::size_t cin, std::size_t h, std::size_t w, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t ho, std::size_t wo, double* col) {
    const std::size_t plane = ho * wo;
    for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                double* row = col + ((c * k + ky) * k + kx) * plane;
                for (std::size_t oy = 0; oy < ho; ++oy) {
                    const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                    double* dst = row + oy * wo;
                    if (iy < 0 || iy >= static_cast<long>(h)) {
                        std::fill(dst, dst + wo, 0.0);
                        continue;
                    }
                    const double* src = x + (c * h + static_cast<std::size_t>(iy)) * w;
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                        dst[ox] = (ix < 0 || ix >= static_cast<long>(w)) ? 0.0 : src[ix];
                    }
                }
            }
        }
    }
}

void col2im(const double* col, std::size_t cin, std::size_t h, std::size_t w, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t ho, std::size_t wo, double* dx) {
    const std::size_t plane = ho * wo;
    for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                const double* row = col + ((c * k + ky) * k + kx) * plane;
                for (std::size_t oy = 0; oy < ho; ++oy) {
                    const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                    if (iy < 0 || iy >= static_cast<long>(h)) continue;
                    double* dst = dx + (c * h + static_cast<std::size_t>(iy)) * w;
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                        if (ix >= 0 && ix < static_cast<long>(w)) dst[ix] += row[oy * wo + ox];
                    }
                }
            }
        }
    }
}

// Source taps for one output coordinate of a half-pixel bilinear resize.
struct LerpTap {
    std::size_t i0, i1;
    double w1;
};

std::vector<LerpTap> lerp_taps(std::size_t in, std::size_t out) {
    std::vector<LerpTap> taps(out);
    const double ratio = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t o = 0; o < out; ++o) {
        double src = (static_cast<double>(o) + 0.5) * ratio - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in - 1));
        const auto i0 = static_cast<std::size_t>(std::floor(src));
        const std::size_t i1 = std::min(i0 + 1, in - 1);
        taps[o] = {i0, i1, src - static_cast<double>(i0)};
    }
    return taps;
}

}  // namespace

double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

Var add(Var a, Var b) {
    Tape& tp = tape_of({a, b});
    require_same_shape("add", a, b);
    Tensor out = a.value();
    const auto& bv = b.value().storage();
    for (std::size_t i = 0; i < bv.size(); ++i) out[i] += bv[i];
    out.set_requires_grad(false);
    const std::size_t ia = a.id(), ib = b.id();
    return tp.record(std::move(out), any_grad({a, b}), [ia, ib](Tape& t, std::size_t, const Grad& g) {
        for (std::size_t id : {ia, ib}) {
            if (!t.needs_grad(id)) continue;
            Grad& gx = t.grad(id);
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
    });
}

Var sub(Var a, Var b) {
    Tape& tp = tape_of({a, b});
    require_same_shape("sub", a, b);
    Tensor out = a.value();
    const auto& bv = b.value().storage();
    for (std::size_t i = 0; i < bv.size(); ++i) out[i] -= bv[i];
    const std::size_t ia = a.id(), ib = b.id();
    return tp.record(std::move(out), any_grad({a, b}), [ia, ib](Tape& t, std::size_t, const Grad& g) {
        if (t.needs_grad(ia)) {
            Grad& ga = t.grad(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.needs_grad(ib)) {
            Grad& gb = t.grad(ib);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Var mul(Var a, Var b) {
    Tape& tp = tape_of({a, b});
    require_same_shape("mul", a, b);
    Tensor out = a.value();
    const auto& bv = b.value().storage();
    for (std::size_t i = 0; i < bv.size(); ++i) out[i] *= bv[i];
    const std::size_t ia = a.id(), ib = b.id();
    return tp.record(std::move(out), any_grad({a, b}), [ia, ib](Tape& t, std::size_t, const Grad& g) {
        const auto& av = t.value(ia).storage();
        const auto& bv = t.value(ib).storage();
        if (t.needs_grad(ia)) {
            Grad& ga = t.grad(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (t.needs_grad(ib)) {
            Grad& gb = t.grad(ib);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Var scale(Var a, double s) {
    Tensor out = a.value();
    for (auto& v : out.storage()) v *= s;
    return unary(a, std::move(out), [s](double) { return s; });
}

Var square(Var a) {
    Tensor out = a.value();
    for (auto& v : out.storage()) v *= v;
    return unary(a, std::move(out), [](double x) { return 2.0 * x; });
}

Var abs(Var a) {
    Tensor out = a.value();
    for (auto& v : out.storage()) v = std::fabs(v);
    return unary(a, std::move(out), [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var gelu(Var a) {
    Tensor out = a.value();
    for (auto& v : out.storage()) v = gelu_scalar(v);
    return unary(a, std::move(out), [](double x) {
        const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        const double pdf = std::exp(-0.5 * x * x) * kInvSqrt2Pi;
        return cdf + x * pdf;
    });
}

Var sum(Var a) {
    Tape& tp = tape_of({a});
    double s = 0.0;
    for (double v : a.value().storage()) s += v;
    const std::size_t ia = a.id();
    return tp.record(Tensor::scalar(s), a.requires_grad(), [ia](Tape& t, std::size_t, const Grad& g) {
        Grad& ga = t.grad(ia);
        for (double& v : ga) v += g[0];
    });
}

Var mean(Var a) {
    Tape& tp = tape_of({a});
    double s = 0.0;
    for (double v : a.value().storage()) s += v;
    const double n = static_cast<double>(a.numel());
    const std::size_t ia = a.id();
    return tp.record(Tensor::scalar(s / n), a.requires_grad(), [ia, n](Tape& t, std::size_t, const Grad& g) {
        Grad& ga = t.grad(ia);
        const double d = g[0] / n;
        for (double& v : ga) v += d;
    });
}

Var add_channel(Var a, Var b) {
    Tape& tp = tape_of({a, b});
    const Shape& s = a.shape();
    if (b.value().rank() != 1 || b.shape()[0] != s[0]) {
        throw DimensionError("add_channel: bias " + shape_str(b.shape()) + " does not match " + shape_str(s));
    }
    const std::size_t c = s[0], inner = a.numel() / c;
    Tensor out = a.value();
    const auto& bv = b.value().storage();
    for (std::size_t ch = 0; ch < c; ++ch) {
        double* p = out.data().data() + ch * inner;
        for (std::size_t i = 0; i < inner; ++i) p[i] += bv[ch];
    }
    const std::size_t ia = a.id(), ib = b.id();
    return tp.record(std::move(out), any_grad({a, b}), [ia, ib, c, inner](Tape& t, std::size_t, const Grad& g) {
        if (t.needs_grad(ia)) {
            Grad& ga = t.grad(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.needs_grad(ib)) {
            Grad& gb = t.grad(ib);
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (std::size_t i = 0; i < inner; ++i) acc += g[ch * inner + i];
                gb[ch] += acc;
            }
        }
    });
}

Var add_row(Var a, Var b) {
    Tape& tp = tape_of({a, b});
    const Shape& s = a.shape();
    const std::size_t d = s.back();
    if (b.value().rank() != 1 || b.shape()[0] != d) {
        throw DimensionError("add_row: bias " + shape_str(b.shape()) + " does not match " + shape_str(s));
    }
    const std::size_t rows = a.numel() / d;
    Tensor out = a.value();
    const auto& bv = b.value().storage();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < d; ++j) out[r * d + j] += bv[j];
    }
    const std::size_t ia = a.id(), ib = b.id();
    return tp.record(std::move(out), any_grad({a, b}), [ia, ib, rows, d](Tape& t, std::size_t, const Grad& g) {
        if (t.needs_grad(ia)) {
            Grad& ga = t.grad(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.needs_grad(ib)) {
            Grad& gb = t.grad(ib);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t j = 0; j < d; ++j) gb[j] += g[r * d + j];
            }
        }
    });
}

Var mul_row(Var a, Var v) {
    Tape& tp = tape_of({a, v});
    const Shape& s = a.shape();
    const std::size_t d = s.back();
    if (v.value().rank() != 1 || v.shape()[0] != d) {
        throw DimensionError("mul_row: vector " + shape_str(v.shape()) + " does not match " + shape_str(s));
    }
    const std::size_t rows = a.numel() / d;
    Tensor out = a.value();
    const auto& vv = v.value().storage();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < d; ++j) out[r * d + j] *= vv[j];
    }
    const std::size_t ia = a.id(), iv = v.id();
    return tp.record(std::move(out), any_grad({a, v}), [ia, iv, rows, d](Tape& t, std::size_t, const Grad& g) {
        const auto& av = t.value(ia).storage();
        const auto& vv = t.value(iv).storage();
        if (t.needs_grad(ia)) {
            Grad& ga = t.grad(ia);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t j = 0; j < d; ++j) ga[r * d + j] += g[r * d + j] * vv[j];
            }
        }
        if (t.needs_grad(iv)) {
            Grad& gv = t.grad(iv);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t j = 0; j < d; ++j) gv[j] += g[r * d + j] * av[r * d + j];
            }
        }
    });
}

Var mean_trailing(Var a) {
    Tape& tp = tape_of({a});
    const std::size_t c = a.shape()[0], inner = a.numel() / c;
    Tensor out({c});
    const auto& av = a.value().storage();
    for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (std::size_t i = 0; i < inner; ++i) acc += av[ch * inner + i];
        out[ch] = acc / static_cast<double>(inner);
    }
    const std::size_t ia = a.id();
    return tp.record(std::move(out), a.requires_grad(), [ia, c, inner](Tape& t, std::size_t, const Grad& g) {
        Grad& ga = t.grad(ia);
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double d = g[ch] / static_cast<double>(inner);
            for (std::size_t i = 0; i < inner; ++i) ga[ch * inner + i] += d;
        }
    });
}

Var matmul(Var a, Var b) {
    Tape& tp = tape_of({a, b});
    require_rank("matmul", a, 2);
    require_rank("matmul", b, 2);
    const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    if (b.shape()[0] != k) {
        throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    }
    Tensor out({m, n});
    detail::gemm(a.value().data().data(), b.value().data().data(), out.data().data(), m, k, n, false, false,
                 false);
    const std::size_t ia = a.id(), ib = b.id();
    return tp.record(std::move(out), any_grad({a, b}), [ia, ib, m, k, n](Tape& t, std::size_t, const Grad& g) {
        if (t.needs_grad(ia)) {
            // dA = dC * B^T
            detail::gemm(g.data(), t.value(ib).data().data(), t.grad(ia).data(), m, n, k, false, true, true);
        }
        if (t.needs_grad(ib)) {
            // dB = A^T * dC
            detail::gemm(t.value(ia).data().data(), g.data(), t.grad(ib).data(), k, m, n, true, false, true);
        }
    });
}

Var transpose(Var a) {
    Tape& tp = tape_of({a});
    require_rank("transpose", a, 2);
    const std::size_t r = a.shape()[0], c = a.shape()[1];
    Tensor out({c, r});
    const auto& av = a.value().storage();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
    }
    const std::size_t ia = a.id();
    return tp.record(std::move(out), a.requires_grad(), [ia, r, c](Tape& t, std::size_t, const Grad& g) {
        Grad& ga = t.grad(ia);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
        }
    });
}

Var reshape(Var a, Shape shape) {
    Tape& tp = tape_of({a});
    Tensor out = a.value().reshaped(std::move(shape));
    const std::size_t ia = a.id();
    return tp.record(std::move(out), a.requires_grad(), [ia](Tape& t, std::size_t, const Grad& g) {
        Grad& ga = t.grad(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
    if (parts.empty()) throw DimensionError("concat: no inputs");
    Tape* tp = parts[0].tape();
    const Shape& first = parts[0].shape();
    if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_str(first));
    Shape out_shape = first;
    out_shape[axis] = 0;
    bool needs = false;
    for (const Var& p : parts) {
        if (p.tape() != tp) throw ContractError("concat: operands recorded on different tapes");
        const Shape& s = p.shape();
        bool ok = s.size() == first.size();
        for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
        if (!ok) throw DimensionError("concat: incompatible shapes " + shape_str(first) + " and " + shape_str(s));
        out_shape[axis] += s[axis];
        needs = needs || p.requires_grad();
    }
    const AxisSplit total = split_axis(out_shape, axis);
    Tensor out(out_shape);
    std::vector<std::size_t> ids, lens;
    std::size_t offset = 0;
    for (const Var& p : parts) {
        const std::size_t len = p.shape()[axis];
        const auto& pv = p.value().storage();
        for (std::size_t o = 0; o < total.outer; ++o) {
            std::copy_n(pv.data() + o * len * total.inner, len * total.inner,
                        out.data().data() + (o * total.len + offset) * total.inner);
        }
        ids.push_back(p.id());
        lens.push_back(len);
        offset += len;
    }
    return tp->record(std::move(out), needs, [ids, lens, total](Tape& t, std::size_t, const Grad& g) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (t.needs_grad(ids[k])) {
                Grad& gp = t.grad(ids[k]);
                for (std::size_t o = 0; o < total.outer; ++o) {
                    const double* src = g.data() + (o * total.len + off) * total.inner;
                    double* dst = gp.data() + o * lens[k] * total.inner;
                    for (std::size_t i = 0; i < lens[k] * total.inner; ++i) dst[i] += src[i];
                }
            }
            off += lens[k];
        }
    });
}

Var softmax(Var a, std::size_t axis) {
    Tape& tp = tape_of({a});
    if (axis >= a.value().rank()) throw DimensionError("softmax: axis out of range for " + shape_str(a.shape()));
    const AxisSplit sp = split_axis(a.shape(), axis);
    Tensor out = a.value();
    double* y = out.data().data();
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t in = 0; in < sp.inner; ++in) {
            double* base = y + o * sp.len * sp.inner + in;
            double mx = base[0];
            for (std::size_t j = 1; j < sp.len; ++j) mx = std::max(mx, base[j * sp.inner]);
            double z = 0.0;
            for (std::size_t j = 0; j < sp.len; ++j) {
                base[j * sp.inner] = std::exp(base[j * sp.inner] - mx);
                z += base[j * sp.inner];
            }
            for (std::size_t j = 0; j < sp.len; ++j) base[j * sp.inner] /= z;
        }
    }
    const std::size_t ia = a.id();
    return tp.record(std::move(out), a.requires_grad(), [ia, sp](Tape& t, std::size_t self, const Grad& g) {
        const auto& yv = t.value(self).storage();
        Grad& ga = t.grad(ia);
        for (std::size_t o = 0; o < sp.outer; ++o) {
            for (std::size_t in = 0; in < sp.inner; ++in) {
                const std::size_t base = o * sp.len * sp.inner + in;
                double dot = 0.0;
                for (std::size_t j = 0; j < sp.len; ++j) dot += g[base + j * sp.inner] * yv[base + j * sp.inner];
                for (std::size_t j = 0; j < sp.len; ++j) {
                    const std::size_t idx = base + j * sp.inner;
                    ga[idx] += yv[idx] * (g[idx] - dot);
                }
            }
        }
    });
}

Var conv2d(Var x, Var kernels, std::size_t stride, std::size_t pad) {
    Tape& tp = tape_of({x, kernels});
    require_rank("conv2d input", x, 3);
    require_rank("conv2d kernels", kernels, 4);
    const Shape& xs = x.shape();
    const Shape& ks = kernels.shape();
    const std::size_t cin = xs[0], h = xs[1], w = xs[2];
    const std::size_t cout = ks[0], k = ks[2];
    if (ks[1] != cin || ks[3] != k) {
        throw DimensionError("conv2d: kernels " + shape_str(ks) + " incompatible with input " + shape_str(xs));
    }
    if (stride == 0) throw ContractError("conv2d: stride must be positive");
    if (k > h + 2 * pad || k > w + 2 * pad) {
        throw DimensionError("conv2d: kernel " + shape_str(ks) + " larger than padded input " + shape_str(xs));
    }
    const std::size_t ho = (h + 2 * pad - k) / stride + 1;
    const std::size_t wo = (w + 2 * pad - k) / stride + 1;
    const std::size_t patch = cin * k * k, plane = ho * wo;
    std::vector<double> col(patch * plane);
    im2col(x.value().data().data(), cin, h, w, k, stride, pad, ho, wo, col.data());
    Tensor out({cout, ho, wo});
    detail::gemm(kernels.value().data().data(), col.data(), out.data().data(), cout, patch, plane, false, false,
                 false);
    const std::size_t ix = x.id(), ik = kernels.id();
    return tp.record(std::move(out), any_grad({x, kernels}),
                     [=](Tape& t, std::size_t, const Grad& g) {
                         std::vector<double> cols(patch * plane);
                         if (t.needs_grad(ik)) {
                             im2col(t.value(ix).data().data(), cin, h, w, k, stride, pad, ho, wo, cols.data());
                             // dK = dY * col^T
                             detail::gemm(g.data(), cols.data(), t.grad(ik).data(), cout, plane, patch, false, true,
                                          true);
                         }
                         if (t.needs_grad(ix)) {
                             // dcol = K^T * dY
                             detail::gemm(t.value(ik).data().data(), g.data(), cols.data(), patch, cout, plane, true,
                                          false, false);
                             col2im(cols.data(), cin, h, w, k, stride, pad, ho, wo, t.grad(ix).data());
                         }
                     });
}

Var avg_pool2(Var x) {
    Tape& tp = tape_of({x});
    require_rank("avg_pool2", x, 3);
    const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    if (h < 2 || w < 2) throw DimensionError("avg_pool2: input too small " + shape_str(x.shape()));
    const std::size_t ho = h / 2, wo = w / 2;
    Tensor out({c, ho, wo});
    const auto& xv = x.value().storage();
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < ho; ++y) {
            const double* r0 = xv.data() + (ch * h + 2 * y) * w;
            const double* r1 = r0 + w;
            double* dst = out.data().data() + (ch * ho + y) * wo;
            for (std::size_t xx = 0; xx < wo; ++xx) {
                dst[xx] = 0.25 * ((r0[2 * xx] + r0[2 * xx + 1]) + (r1[2 * xx] + r1[2 * xx + 1]));
            }
        }
    }
    const std::size_t ix = x.id();
    return tp.record(std::move(out), x.requires_grad(), [=](Tape& t, std::size_t, const Grad& g) {
        Grad& gx = t.grad(ix);
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t y = 0; y < ho; ++y) {
                double* r0 = gx.data() + (ch * h + 2 * y) * w;
                double* r1 = r0 + w;
                const double* src = g.data() + (ch * ho + y) * wo;
                for (std::size_t xx = 0; xx < wo; ++xx) {
                    const double d = 0.25 * src[xx];
                    r0[2 * xx] += d;
                    r0[2 * xx + 1] += d;
                    r1[2 * xx] += d;
                    r1[2 * xx + 1] += d;
                }
            }
        }
    });
}

Var upsample_nearest2(Var x) {
    Tape& tp = tape_of({x});
    require_rank("upsample_nearest2", x, 3);
    const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    const std::size_t ho = 2 * h, wo = 2 * w;
    Tensor out({c, ho, wo});
    const auto& xv = x.value().storage();
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < ho; ++y) {
            const double* src = xv.data() + (ch * h + y / 2) * w;
            double* dst = out.data().data() + (ch * ho + y) * wo;
            for (std::size_t xx = 0; xx < wo; ++xx) dst[xx] = src[xx / 2];
        }
    }
    const std::size_t ix = x.id();
    return tp.record(std::move(out), x.requires_grad(), [=](Tape& t, std::size_t, const Grad& g) {
        Grad& gx = t.grad(ix);
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t y = 0; y < ho; ++y) {
                double* dst = gx.data() + (ch * h + y / 2) * w;
                const double* src = g.data() + (ch * ho + y) * wo;
                for (std::size_t xx = 0; xx < wo; ++xx) dst[xx / 2] += src[xx];
            }
        }
    });
}

Var resize_bilinear(Var x, std::size_t out_h, std::size_t out_w) {
    Tape& tp = tape_of({x});
    require_rank("resize_bilinear", x, 3);
    if (out_h == 0 || out_w == 0) throw DimensionError("resize_bilinear: empty output size");
    const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    const auto ty = lerp_taps(h, out_h);
    const auto tx = lerp_taps(w, out_w);
    Tensor out({c, out_h, out_w});
    const auto& xv = x.value().storage();
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* plane = xv.data() + ch * h * w;
        for (std::size_t y = 0; y < out_h; ++y) {
            const LerpTap& a = ty[y];
            for (std::size_t xx = 0; xx < out_w; ++xx) {
                const LerpTap& b = tx[xx];
                const double top = plane[a.i0 * w + b.i0] * (1.0 - b.w1) + plane[a.i0 * w + b.i1] * b.w1;
                const double bot = plane[a.i1 * w + b.i0] * (1.0 - b.w1) + plane[a.i1 * w + b.i1] * b.w1;
                out.at(ch, y, xx) = top * (1.0 - a.w1) + bot * a.w1;
            }
        }
    }
    const std::size_t ix = x.id();
    return tp.record(std::move(out), x.requires_grad(), [=](Tape& t, std::size_t, const Grad& g) {
        Grad& gx = t.grad(ix);
        for (std::size_t ch = 0; ch < c; ++ch) {
            double* plane = gx.data() + ch * h * w;
            for (std::size_t y = 0; y < out_h; ++y) {
                const LerpTap& a = ty[y];
                for (std::size_t xx = 0; xx < out_w; ++xx) {
                    const LerpTap& b = tx[xx];
                    const double d = g[(ch * out_h + y) * out_w + xx];
                    plane[a.i0 * w + b.i0] += d * (1.0 - a.w1) * (1.0 - b.w1);
                    plane[a.i0 * w + b.i1] += d * (1.0 - a.w1) * b.w1;
                    plane[a.i1 * w + b.i0] += d * a.w1 * (1.0 - b.w1);
                    plane[a.i1 * w + b.i1] += d * a.w1 * b.w1;
                }
            }
        }
    });
}

Var layernorm(Var x, Var gain, Var bias, double eps) {
    Tape& tp = tape_of({x, gain, bias});
    const std::size_t d = x.shape().back();
    if (gain.value().rank() != 1 || gain.shape()[0] != d || bias.value().rank() != 1 || bias.shape()[0] != d) {
        throw DimensionError("layernorm: gain " + shape_str(gain.shape()) + " / bias " + shape_str(bias.shape()) +
                             " do not match feature size of " + shape_str(x.shape()));
    }
    const std::size_t rows = x.numel() / d;
    const auto& xv = x.value().storage();
    const auto& gv = gain.value().storage();
    const auto& bv = bias.value().storage();
    std::vector<double> xhat(x.numel()), inv_std(rows);
    Tensor out(x.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* src = xv.data() + r * d;
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) mu += src[j];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (src[j] - mu) * (src[j] - mu);
        var /= static_cast<double>(d);
        const double is = 1.0 / std::sqrt(var + eps);
        inv_std[r] = is;
        for (std::size_t j = 0; j < d; ++j) {
            xhat[r * d + j] = (src[j] - mu) * is;
            out[r * d + j] = xhat[r * d + j] * gv[j] + bv[j];
        }
    }
    const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
    return tp.record(std::move(out), any_grad({x, gain, bias}),
                     [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, std::size_t,
                                                                               const Grad& g) {
                         const auto& gv = t.value(ig).storage();
                         if (t.needs_grad(ig)) {
                             Grad& gg = t.grad(ig);
                             for (std::size_t i = 0; i < g.size(); ++i) gg[i % d] += g[i] * xhat[i];
                         }
                         if (t.needs_grad(ib)) {
                             Grad& gb = t.grad(ib);
                             for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
                         }
                         if (t.needs_grad(ix)) {
                             Grad& gx = t.grad(ix);
                             const double nd = static_cast<double>(d);
                             for (std::size_t r = 0; r < rows; ++r) {
                                 double m1 = 0.0, m2 = 0.0;
                                 for (std::size_t j = 0; j < d; ++j) {
                                     const double dxh = g[r * d + j] * gv[j];
                                     m1 += dxh;
                                     m2 += dxh * xhat[r * d + j];
                                 }
                                 m1 /= nd;
                                 m2 /= nd;
                                 for (std::size_t j = 0; j < d; ++j) {
                                     const double dxh = g[r * d + j] * gv[j];
                                     gx[r * d + j] += inv_std[r] * (dxh - m1 - xhat[r * d + j] * m2);
                                 }
                             }
                         }
                     });
}

}  // namespace mvt
