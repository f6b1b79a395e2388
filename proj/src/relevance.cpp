#include "nnn/relevance.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nnn {

RelevanceTable RelevanceTable::estimate(const LabeledDataset& data, double threshold,
                                        double pseudo_count) {
    if (data.n_rows == 0) throw std::invalid_argument("relevance estimation needs a non-empty dataset");
    if (threshold <= 0.0 || threshold >= 1.0) throw std::invalid_argument("threshold must be in (0,1)");
    if (pseudo_count <= 0.0) throw std::invalid_argument("pseudo_count must be positive");

    RelevanceTable t;
    t.n_input_ = data.n_cols;
    t.n_output_ = data.n_classes;
    t.threshold_ = threshold;
    t.pseudo_count_ = pseudo_count;
    t.joint_.assign(t.n_input_ * t.n_output_ * 4, 0.0);
    t.npmi_.assign(t.joint_.size(), 0.0);

    // Count joints; columns are independent, so shard the loop on j.
    const auto n_rows = static_cast<std::ptrdiff_t>(data.n_rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t js = 0; js < static_cast<std::ptrdiff_t>(t.n_input_); ++js) {
        const auto j = static_cast<std::size_t>(js);
        for (std::ptrdiff_t r = 0; r < n_rows; ++r) {
            const bool u = data.features[static_cast<std::size_t>(r) * data.n_cols + j] > threshold;
            const std::size_t cls = data.label_index(static_cast<std::size_t>(r));
            for (std::size_t i = 0; i < t.n_output_; ++i) {
                t.joint_[t.cell(j, i, u, i == cls)] += 1.0;
            }
        }
    }

    const double denom = static_cast<double>(data.n_rows) + 4.0 * pseudo_count;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t cs = 0; cs < static_cast<std::ptrdiff_t>(t.joint_.size()); ++cs) {
        const auto c = static_cast<std::size_t>(cs);
        t.joint_[c] = (t.joint_[c] + pseudo_count) / denom;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t js = 0; js < static_cast<std::ptrdiff_t>(t.n_input_); ++js) {
        const auto j = static_cast<std::size_t>(js);
        for (std::size_t i = 0; i < t.n_output_; ++i) {
            for (int u = 0; u < 2; ++u) {
                for (int v = 0; v < 2; ++v) {
                    const double puv = t.joint(j, i, u, v);
                    const double pu = t.marginal_x(j, i, u);
                    const double pv = t.marginal_y(j, i, v);
                    // At puv == 1 the joint self-information vanishes; the
                    // continuity limit of NPMI is 1.
                    double n = 1.0;
                    if (puv < 1.0) {
                        n = (std::log(puv) - std::log(pu) - std::log(pv)) / (-std::log(puv));
                    }
                    t.npmi_[t.cell(j, i, u, v)] = n;
                }
            }
        }
    }
    return t;
}

void RelevanceTable::relevance_vector(std::span<const double> x, std::size_t i, bool v,
                                      std::span<double> out) const {
    if (x.size() != n_input_ || out.size() != n_input_)
        throw std::out_of_range("relevance_vector: input length mismatch");
    if (i >= n_output_) throw std::out_of_range("relevance_vector: output index out of range");
    for (std::size_t j = 0; j < n_input_; ++j) {
        out[j] = std::max(npmi(j, i, binarize(x[j]), v), 0.0);
    }
}

std::vector<double> RelevanceTable::relevance_vector(std::span<const double> x, std::size_t i,
                                                     bool v) const {
    std::vector<double> out(n_input_);
    relevance_vector(x, i, v, out);
    return out;
}

void RelevanceTable::export_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write relevance csv: " + path);
    f.precision(17);
    f << "input,output,u,v,p_joint,p_x,p_y,npmi\n";
    for (std::size_t j = 0; j < n_input_; ++j)
        for (std::size_t i = 0; i < n_output_; ++i)
            for (int u = 0; u < 2; ++u)
                for (int v = 0; v < 2; ++v)
                    f << j << ',' << i << ',' << u << ',' << v << ',' << joint(j, i, u, v) << ','
                      << marginal_x(j, i, u) << ',' << marginal_y(j, i, v) << ','
                      << npmi(j, i, u, v) << '\n';
}

std::uint64_t RelevanceTable::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_bytes = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    const double params[2] = {threshold_, pseudo_count_};
    const std::uint64_t dims[2] = {n_input_, n_output_};
    mix_bytes(dims, sizeof(dims));
    mix_bytes(params, sizeof(params));
    mix_bytes(joint_.data(), joint_.size() * sizeof(double));
    return h;
}

} // namespace nnn
