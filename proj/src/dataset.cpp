#include "nnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "nnn/rng.hpp"

namespace nnn {

std::size_t LabeledDataset::label_index(std::size_t r) const {
    std::span<const double> lr = label_row(r);
    for (std::size_t c = 0; c < n_classes; ++c)
        if (lr[c] == 1.0) return c;
    throw std::runtime_error("label row is not one-hot");
}

LabeledDataset LabeledDataset::head(std::size_t n) const { return slice(0, n); }

LabeledDataset LabeledDataset::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > n_rows) throw std::out_of_range("dataset slice out of range");
    LabeledDataset out;
    out.n_rows = count;
    out.n_cols = n_cols;
    out.n_classes = n_classes;
    out.features.assign(features.begin() + static_cast<std::ptrdiff_t>(begin * n_cols),
                        features.begin() + static_cast<std::ptrdiff_t>((begin + count) * n_cols));
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin * n_classes),
                      labels.begin() + static_cast<std::ptrdiff_t>((begin + count) * n_classes));
    return out;
}

std::uint64_t LabeledDataset::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_bytes = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    const std::uint64_t dims[3] = {n_rows, n_cols, n_classes};
    mix_bytes(dims, sizeof(dims));
    mix_bytes(features.data(), features.size() * sizeof(double));
    mix_bytes(labels.data(), labels.size() * sizeof(double));
    return h;
}

namespace {

constexpr std::uint32_t kDataMagic = 0x444e4e4e; // "NNND"

template <class T>
void wr(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T rd(std::ifstream& f) {
    T v{};
    if (!f.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated dataset file");
    return v;
}

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    if (!f.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated IDX file: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
}

} // namespace

void LabeledDataset::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write dataset file: " + path);
    wr(f, kDataMagic);
    wr<std::uint32_t>(f, 1);
    wr<std::uint64_t>(f, n_rows);
    wr<std::uint64_t>(f, n_cols);
    wr<std::uint64_t>(f, n_classes);
    f.write(reinterpret_cast<const char*>(features.data()),
            static_cast<std::streamsize>(features.size() * sizeof(double)));
    f.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size() * sizeof(double)));
}

LabeledDataset LabeledDataset::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read dataset file: " + path);
    if (rd<std::uint32_t>(f) != kDataMagic) throw std::runtime_error("bad dataset magic: " + path);
    if (rd<std::uint32_t>(f) != 1) throw std::runtime_error("unsupported dataset version: " + path);
    LabeledDataset d;
    d.n_rows = rd<std::uint64_t>(f);
    d.n_cols = rd<std::uint64_t>(f);
    d.n_classes = rd<std::uint64_t>(f);
    d.features.resize(d.n_rows * d.n_cols);
    d.labels.resize(d.n_rows * d.n_classes);
    if (!f.read(reinterpret_cast<char*>(d.features.data()),
                static_cast<std::streamsize>(d.features.size() * sizeof(double))) ||
        !f.read(reinterpret_cast<char*>(d.labels.data()),
                static_cast<std::streamsize>(d.labels.size() * sizeof(double))))
        throw std::runtime_error("truncated dataset file: " + path);
    return d;
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream fi(images_path, std::ios::binary);
    if (!fi) throw std::runtime_error("cannot open IDX image file: " + images_path);
    std::ifstream fl(labels_path, std::ios::binary);
    if (!fl) throw std::runtime_error("cannot open IDX label file: " + labels_path);

    if (read_be32(fi, images_path) != 0x00000803)
        throw std::runtime_error("bad magic in IDX image file: " + images_path);
    const std::uint32_t n_img = read_be32(fi, images_path);
    const std::uint32_t rows = read_be32(fi, images_path);
    const std::uint32_t cols = read_be32(fi, images_path);

    if (read_be32(fl, labels_path) != 0x00000801)
        throw std::runtime_error("bad magic in IDX label file: " + labels_path);
    const std::uint32_t n_lab = read_be32(fl, labels_path);
    if (n_img != n_lab)
        throw std::runtime_error("image/label count mismatch: " + std::to_string(n_img) + " vs " +
                                 std::to_string(n_lab));

    LabeledDataset d;
    d.n_rows = n_img;
    d.n_cols = static_cast<std::size_t>(rows) * cols;
    d.n_classes = 10;
    d.features.resize(d.n_rows * d.n_cols);
    d.labels.assign(d.n_rows * d.n_classes, 0.0);

    std::vector<unsigned char> buf(d.n_cols);
    for (std::size_t r = 0; r < d.n_rows; ++r) {
        if (!fi.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
            throw std::runtime_error("truncated IDX image file: " + images_path);
        for (std::size_t p = 0; p < d.n_cols; ++p)
            d.features[r * d.n_cols + p] = buf[p] / 255.0;
        unsigned char lab = 0;
        if (!fl.read(reinterpret_cast<char*>(&lab), 1))
            throw std::runtime_error("truncated IDX label file: " + labels_path);
        if (lab >= 10) throw std::runtime_error("label out of range in " + labels_path);
        d.labels[r * d.n_classes + lab] = 1.0;
    }
    return d;
}

namespace {

LabeledDataset gen_toy(std::size_t count, std::uint64_t seed, std::size_t n_attr,
                       bool last_is_constant) {
    if (count < 1) throw std::invalid_argument("toy dataset needs count >= 1");
    const std::size_t n_gauss = n_attr - 1;
    LabeledDataset d;
    d.n_rows = count;
    d.n_cols = n_attr;
    d.n_classes = 2;
    d.features.resize(count * n_attr);
    d.labels.assign(count * 2, 0.0);

    Rng rng(seed);
    // Gaussian block: covariance 0.01 on the diagonal, 0.005 off it.
    // x_a = mu + sqrt(0.005) * (shared + own) gives exactly that.
    const double scale = std::sqrt(0.005);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t cls = rng.bernoulli(0.5) ? 1 : 0;
        const double mu = cls == 0 ? 0.3 : 0.7;
        const double shared = rng.normal();
        for (std::size_t a = 0; a < n_gauss; ++a) {
            const double val = mu + scale * (shared + rng.normal());
            d.features[r * n_attr + a] = std::clamp(val, 0.0, 1.0);
        }
        d.features[r * n_attr + n_gauss] = last_is_constant ? 0.5 : rng.uniform();
        d.labels[r * 2 + cls] = 1.0;
    }
    return d;
}

} // namespace

LabeledDataset gen_toy_arch(std::size_t count, std::uint64_t seed) {
    return gen_toy(count, seed, 4, false);
}

LabeledDataset gen_toy_param(std::size_t count, std::uint64_t seed) {
    return gen_toy(count, seed, 3, true);
}

LabeledDataset corrupt_bg_rand(const LabeledDataset& data, std::uint64_t seed, double ink_threshold) {
    LabeledDataset out = data;
    Rng rng(seed);
    for (double& v : out.features) {
        if (v <= ink_threshold) v = rng.uniform();
    }
    return out;
}

LabeledDataset corrupt_bg_img(const LabeledDataset& data,
                              const std::vector<std::vector<std::vector<double>>>& patch_pool,
                              std::uint64_t seed, double ink_threshold) {
    if (patch_pool.empty()) throw std::invalid_argument("empty patch pool");
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(data.n_cols))));
    if (side * side != data.n_cols)
        throw std::invalid_argument("corrupt_bg_img requires square image features");
    for (const auto& p : patch_pool) {
        if (p.size() < side || p.empty() || p[0].size() < side)
            throw std::invalid_argument("patch smaller than image size");
    }
    LabeledDataset out = data;
    Rng rng(seed);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        const auto& patch = patch_pool[rng.index(patch_pool.size())];
        const std::size_t r0 = rng.index(patch.size() - side + 1);
        const std::size_t c0 = rng.index(patch[0].size() - side + 1);
        for (std::size_t y = 0; y < side; ++y) {
            for (std::size_t x = 0; x < side; ++x) {
                double& v = out.features[r * data.n_cols + y * side + x];
                const double bg = patch[r0 + y][c0 + x];
                v = v <= ink_threshold ? bg : std::max(v, bg);
            }
        }
    }
    return out;
}

std::vector<std::vector<double>> load_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open PGM file: " + path);
    std::string magic;
    f >> magic;
    if (magic != "P2" && magic != "P5") throw std::runtime_error("not a PGM file: " + path);
    auto next_token = [&f, &path]() {
        std::string tok;
        while (f >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(f, rest);
                continue;
            }
            return tok;
        }
        throw std::runtime_error("truncated PGM header: " + path);
    };
    const std::size_t cols = std::stoul(next_token());
    const std::size_t rows = std::stoul(next_token());
    const unsigned maxval = static_cast<unsigned>(std::stoul(next_token()));
    if (maxval == 0 || maxval > 255) throw std::runtime_error("unsupported PGM maxval: " + path);
    std::vector<std::vector<double>> img(rows, std::vector<double>(cols));
    if (magic == "P5") {
        f.get(); // single whitespace after maxval
        std::vector<unsigned char> buf(cols);
        for (std::size_t r = 0; r < rows; ++r) {
            if (!f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(cols)))
                throw std::runtime_error("truncated PGM data: " + path);
            for (std::size_t c = 0; c < cols; ++c) img[r][c] = buf[c] / double(maxval);
        }
    } else {
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                unsigned v;
                if (!(f >> v)) throw std::runtime_error("truncated PGM data: " + path);
                img[r][c] = v / double(maxval);
            }
    }
    return img;
}

std::vector<std::vector<std::vector<double>>> load_patch_pool(const std::string& dir) {
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".pgm") paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw std::runtime_error("no .pgm files in patch pool directory: " + dir);
    std::vector<std::vector<std::vector<double>>> pool;
    pool.reserve(paths.size());
    for (const auto& p : paths) pool.push_back(load_pgm(p));
    return pool;
}

} // namespace nnn
