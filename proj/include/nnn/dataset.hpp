#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nnn {

/// Row-major feature matrix with values in [0,1] plus one-hot labels.
struct LabeledDataset {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::size_t n_classes = 0;
    std::vector<double> features; // n_rows * n_cols
    std::vector<double> labels;   // n_rows * n_classes, one-hot

    std::span<const double> row(std::size_t r) const { return {features.data() + r * n_cols, n_cols}; }
    std::span<const double> label_row(std::size_t r) const { return {labels.data() + r * n_classes, n_classes}; }
    std::size_t label_index(std::size_t r) const;

    /// First n rows (class-interleaved sources keep prefixes balanced).
    LabeledDataset head(std::size_t n) const;
    LabeledDataset slice(std::size_t begin, std::size_t count) const;

    std::uint64_t hash() const;

    void save(const std::string& path) const;
    static LabeledDataset load(const std::string& path);
};

/// Standard IDX pair (big-endian magics 0x803 / 0x801); pixels scaled by
/// 1/255, labels one-hot over 10 classes.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

/// 4-attribute, 2-class toy set: attributes 1-3 per-class joint Gaussian
/// (means 0.3 / 0.7, covariance 0.01 I + 0.005 off-diagonal), attribute 4
/// uniform on [0,1]; everything clamped to [0,1].
LabeledDataset gen_toy_arch(std::size_t count, std::uint64_t seed);

/// 3-attribute, 2-class toy set: attributes 1-2 per-class joint Gaussian,
/// attribute 3 the constant 0.5.
LabeledDataset gen_toy_param(std::size_t count, std::uint64_t seed);

/// Background pixels (value <= ink_threshold) replaced by uniform noise;
/// ink and labels untouched.
LabeledDataset corrupt_bg_rand(const LabeledDataset& data, std::uint64_t seed,
                               double ink_threshold = 0.1);

/// Background replaced by a randomly cropped patch; ink blended with the
/// patch by per-pixel max.
LabeledDataset corrupt_bg_img(const LabeledDataset& data,
                              const std::vector<std::vector<std::vector<double>>>& patch_pool,
                              std::uint64_t seed, double ink_threshold = 0.1);

/// Grayscale PGM (P2 or P5), normalized to [0,1]; returned as rows x cols.
std::vector<std::vector<double>> load_pgm(const std::string& path);

/// All *.pgm files in a directory, sorted by name.
std::vector<std::vector<std::vector<double>>> load_patch_pool(const std::string& dir);

} // namespace nnn
