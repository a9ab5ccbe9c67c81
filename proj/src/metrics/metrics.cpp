#include "mvtryon/metrics/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mvtryon/errors.hpp"

namespace mvt::metrics {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Tensor luma(const Tensor& img) {
    if (img.rank() != 3 || (img.dim(0) != 3 && img.dim(0) != 1))
        throw DimensionError("expected [3 x H x W] or [1 x H x W], got " + shape_str(img.shape()));
    const std::size_t h = img.dim(1), w = img.dim(2), plane = h * w;
    if (img.dim(0) == 1) return img;
    Tensor out({1, h, w});
    for (std::size_t i = 0; i < plane; ++i) out[i] = 0.299 * img[i] + 0.587 * img[plane + i] + 0.114 * img[2 * plane + i];
    return out;
}

Mat to_matrix(const FeatureSet& s, const char* what) {
    if (s.empty()) throw ContractError(std::string(what) + ": empty feature set");
    const std::size_t d = s.front().size();
    Mat m(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].size() != d) throw DimensionError(std::string(what) + ": feature vectors of different length");
        for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s[i][j];
    }
    return m;
}

void moments(const Mat& x, Vec& mu, Mat& cov) {
    const auto n = x.rows(), d = x.cols();
    mu = x.colwise().mean().transpose();
    if (n < 2) {
        cov = Mat::Zero(d, d);
    } else {
        const Mat c = x.rowwise() - mu.transpose();
        cov = (c.transpose() * c) / static_cast<double>(n - 1);
    }
    if (n < d + 1) {
        const double target = cov.trace() / static_cast<double>(d);
        cov = (1.0 - kFidShrinkage) * cov + kFidShrinkage * target * Mat::Identity(d, d);
    }
}

Mat psd_sqrt(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

FeatureSet canonical(FeatureSet s) {
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

double ssim(const Tensor& x, const Tensor& y) {
    if (x.shape() != y.shape())
        throw DimensionError("ssim: shapes " + shape_str(x.shape()) + " and " + shape_str(y.shape()) + " differ");
    const Tensor a = luma(x), b = luma(y);
    const std::size_t h = a.dim(1), w = a.dim(2), k = kSsimWindow;
    if (h < k || w < k) throw ContractError("ssim: image smaller than the 7x7 window");
    constexpr double range = 2.0;
    const double c1 = (0.01 * range) * (0.01 * range), c2 = (0.03 * range) * (0.03 * range);
    const double inv = 1.0 / static_cast<double>(k * k);

    double total = 0.0;
    for (std::size_t y0 = 0; y0 + k <= h; ++y0)
        for (std::size_t x0 = 0; x0 + k <= w; ++x0) {
            double sa = 0, sb = 0;
            for (std::size_t dy = 0; dy < k; ++dy)
                for (std::size_t dx = 0; dx < k; ++dx) {
                    sa += a.at(0, y0 + dy, x0 + dx);
                    sb += b.at(0, y0 + dy, x0 + dx);
                }
            const double ma = sa * inv, mb = sb * inv;
            double va = 0, vb = 0, cab = 0;
            for (std::size_t dy = 0; dy < k; ++dy)
                for (std::size_t dx = 0; dx < k; ++dx) {
                    const double da = a.at(0, y0 + dy, x0 + dx) - ma, db = b.at(0, y0 + dy, x0 + dx) - mb;
                    va += da * da, vb += db * db, cab += da * db;
                }
            va *= inv, vb *= inv, cab *= inv;
            total += ((2 * ma * mb + c1) * (2 * cab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    return total / static_cast<double>((h - k + 1) * (w - k + 1));
}

double lpips_proxy(const Tensor& x, const Tensor& y, const FeatureExtractor& net) {
    if (x.shape() != y.shape())
        throw DimensionError("lpips_proxy: shapes " + shape_str(x.shape()) + " and " + shape_str(y.shape()) + " differ");
    const auto fa = net.taps(x), fb = net.taps(y);
    double total = 0.0;
    for (std::size_t t = 0; t < fa.size(); ++t) {
        const std::size_t c = fa[t].dim(0), hw = fa[t].numel() / c;
        double tap = 0.0;
        for (std::size_t p = 0; p < hw; ++p) {
            double na = 0, nb = 0;
            for (std::size_t ch = 0; ch < c; ++ch) {
                na += fa[t][ch * hw + p] * fa[t][ch * hw + p];
                nb += fb[t][ch * hw + p] * fb[t][ch * hw + p];
            }
            // A zero vector stays zero.
            na = na > 0.0 ? std::sqrt(na) : 1.0;
            nb = nb > 0.0 ? std::sqrt(nb) : 1.0;
            double d = 0;
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double diff = fa[t][ch * hw + p] / na - fb[t][ch * hw + p] / nb;
                d += diff * diff;
            }
            tap += d;
        }
        total += tap / static_cast<double>(hw);
    }
    return total / static_cast<double>(fa.size());
}

FeatureSet extract_features(const std::vector<Tensor>& images, const FeatureExtractor& net) {
    FeatureSet out;
    out.reserve(images.size());
    for (const Tensor& im : images) out.push_back(net.features(im).storage());
    return out;
}

double frechet_distance(const FeatureSet& a, const FeatureSet& b) {
    const Mat xa = to_matrix(a, "frechet_distance"), xb = to_matrix(b, "frechet_distance");
    if (xa.cols() != xb.cols()) throw DimensionError("frechet_distance: feature dimensions differ");
    Vec ma, mb;
    Mat sa, sb;
    moments(xa, ma, sa);
    moments(xb, mb, sb);
    const Mat root_a = psd_sqrt(sa);
    const Mat inner = root_a * sb * root_a;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    const double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double d = (ma - mb).squaredNorm() + sa.trace() + sb.trace() - 2.0 * cross;
    return std::max(0.0, d);
}

double fid_proxy(const std::vector<Tensor>& a, const std::vector<Tensor>& b, const FeatureExtractor& net) {
    return frechet_distance(extract_features(a, net), extract_features(b, net));
}

KidResult kernel_distance(const FeatureSet& a_in, const FeatureSet& b_in, std::uint64_t seed) {
    if (a_in.size() < 2 || b_in.size() < 2) throw ContractError("kernel_distance needs at least two members per set");
    const Mat a = to_matrix(canonical(a_in), "kernel_distance"), b = to_matrix(canonical(b_in), "kernel_distance");
    if (a.cols() != b.cols()) throw DimensionError("kernel_distance: feature dimensions differ");
    const double d = static_cast<double>(a.cols());
    const std::size_t m = std::min({kKidSubsetSize, a_in.size(), b_in.size()});

    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> ia(a_in.size()), ib(b_in.size());
    std::vector<double> values;
    for (std::size_t s = 0; s < kKidSubsets; ++s) {
        std::iota(ia.begin(), ia.end(), 0);
        std::iota(ib.begin(), ib.end(), 0);
        std::shuffle(ia.begin(), ia.end(), rng);
        std::shuffle(ib.begin(), ib.end(), rng);
        Mat x(static_cast<Eigen::Index>(m), a.cols()), y(static_cast<Eigen::Index>(m), b.cols());
        for (std::size_t i = 0; i < m; ++i) {
            x.row(static_cast<Eigen::Index>(i)) = a.row(ia[i]);
            y.row(static_cast<Eigen::Index>(i)) = b.row(ib[i]);
        }
        auto kernel = [d](const Mat& p, const Mat& q) {
            return ((p * q.transpose()).array() / d + 1.0).cube().matrix().eval();
        };
        const Mat kxx = kernel(x, x), kyy = kernel(y, y), kxy = kernel(x, y);
        const double md = static_cast<double>(m);
        const double off_xx = kxx.sum() - kxx.trace(), off_yy = kyy.sum() - kyy.trace();
        values.push_back((off_xx + off_yy) / (md * (md - 1.0)) - 2.0 * kxy.sum() / (md * md));
    }
    KidResult r;
    for (double v : values) r.mean += v;
    r.mean /= static_cast<double>(values.size());
    for (double v : values) r.std += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(r.std / static_cast<double>(values.size()));
    return r;
}

KidResult kid_proxy(const std::vector<Tensor>& a, const std::vector<Tensor>& b, const FeatureExtractor& net,
                    std::uint64_t seed) {
    return kernel_distance(extract_features(a, net), extract_features(b, net), seed);
}

}  // namespace mvt::metrics
