#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace alertlab {

// Folds per-position weights onto event types. Negative indices (PAD) are
// skipped and their share is redistributed proportionally over the remaining
// positions; a context without any real event folds to the zero vector.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> aggregate_positions(std::span<const std::int32_t> context,
                                                             const Eigen::MatrixBase<Derived>& weights,
                                                             std::size_t vocab_size) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(static_cast<Eigen::Index>(vocab_size));
    Scalar kept(0);
    Scalar all(0);
    for (std::size_t i = 0; i < context.size(); ++i) {
        const Scalar w = weights(static_cast<Eigen::Index>(i));
        all += w;
        if (context[i] >= 0) {
            out(context[i]) += w;
            kept += w;
        }
    }
    if (kept > Scalar(0) && kept != all) out *= all / kept;
    return out;
}

}  // namespace alertlab
