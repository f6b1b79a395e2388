#pragma once

#include <span>
#include <string>
#include <vector>

#include "nnn/dataset.hpp"

namespace nnn {

/// Smoothed NPMI lookup between binarized input attributes and one-hot label
/// bits. For every (input j, output i) pair the four joint cells over
/// {0,1} x {0,1} get pseudo_count added, so probabilities stay inside (0,1)
/// and NPMI inside [-1,1].
class RelevanceTable {
public:
    /// Single pass over the dataset: binarize features at `threshold`
    /// (value > threshold reads as 1), count joints, smooth, derive NPMI.
    static RelevanceTable estimate(const LabeledDataset& data, double threshold = 0.5,
                                   double pseudo_count = 1.0);

    std::size_t n_input() const { return n_input_; }
    std::size_t n_output() const { return n_output_; }
    double threshold() const { return threshold_; }
    double pseudo_count() const { return pseudo_count_; }

    bool binarize(double x) const { return x > threshold_; }

    double joint(std::size_t j, std::size_t i, bool u, bool v) const {
        return joint_[cell(j, i, u, v)];
    }
    double marginal_x(std::size_t j, std::size_t i, bool u) const {
        return joint(j, i, u, false) + joint(j, i, u, true);
    }
    double marginal_y(std::size_t j, std::size_t i, bool v) const {
        return joint(j, i, false, v) + joint(j, i, true, v);
    }
    double npmi(std::size_t j, std::size_t i, bool u, bool v) const {
        return npmi_[cell(j, i, u, v)];
    }

    /// max(NPMI, 0) per input attribute, against output bit (i, v), indexed
    /// by the datum's binarized feature values.
    void relevance_vector(std::span<const double> x, std::size_t i, bool v,
                          std::span<double> out) const;
    std::vector<double> relevance_vector(std::span<const double> x, std::size_t i, bool v) const;

    /// One row per (input, output, u, v) with probabilities and NPMI.
    void export_csv(const std::string& path) const;

    std::uint64_t hash() const;

private:
    std::size_t cell(std::size_t j, std::size_t i, bool u, bool v) const {
        return ((j * n_output_ + i) << 2) | (std::size_t(u) << 1) | std::size_t(v);
    }

    std::size_t n_input_ = 0;
    std::size_t n_output_ = 0;
    double threshold_ = 0.5;
    double pseudo_count_ = 1.0;
    std::vector<double> joint_; // smoothed P(x_j=u, y_i=v)
    std::vector<double> npmi_;
};

} // namespace nnn
