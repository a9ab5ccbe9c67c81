#include "mvtryon/numerics/gemm.hpp"

#include <Eigen/Core>

namespace mvt::detail {

namespace {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

template <typename L, typename R>
void assign(MutMap& out, const L& lhs, const R& rhs, bool accumulate) {
    if (accumulate) {
        out.noalias() += lhs * rhs;
    } else {
        out.noalias() = lhs * rhs;
    }
}
}  // namespace

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
          bool trans_a, bool trans_b, bool accumulate) {
    const auto em = static_cast<Eigen::Index>(m);
    const auto ek = static_cast<Eigen::Index>(k);
    const auto en = static_cast<Eigen::Index>(n);
    MutMap out(c, em, en);
    ConstMap am(a, trans_a ? ek : em, trans_a ? em : ek);
    ConstMap bm(b, trans_b ? en : ek, trans_b ? ek : en);
    if (!trans_a && !trans_b) {
        assign(out, am, bm, accumulate);
    } else if (!trans_a && trans_b) {
        assign(out, am, bm.transpose(), accumulate);
    } else if (trans_a && !trans_b) {
        assign(out, am.transpose(), bm, accumulate);
    } else {
        assign(out, am.transpose(), bm.transpose(), accumulate);
    }
}

}  // namespace mvt::detail
