#pragma once

// Dataset loading and synthetic task generation. IDX files follow the MNIST
// big-endian layout (magic 2051 for images, 2049 for labels); pixel values
// are scaled to [0,1].

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/rng.hpp"

namespace hyperlearn {

struct Dataset {
    std::size_t dim = 0;            // D
    std::vector<double> inputs;     // M x D, row-major
    std::vector<int> labels;        // class indices (classification)
    std::vector<double> targets;    // real targets (regression)
    int num_classes = 0;
    std::vector<double> gen_weights;  // generator's true weights, when known

    std::size_t size() const {
        return labels.empty() ? (dim ? targets.size() : 0) : labels.size();
    }
    bool regression() const { return labels.empty() && !targets.empty(); }
    std::span<const double> row(std::size_t i) const { return {inputs.data() + i * dim, dim}; }
};

inline void validate(const Dataset& ds) {
    const std::size_t m = ds.size();
    if (m == 0 || ds.dim == 0) {
        throw validation_error("dataset: empty (M=" + std::to_string(m) +
                               ", D=" + std::to_string(ds.dim) + ")");
    }
    if (ds.inputs.size() != m * ds.dim) {
        throw validation_error("dataset: input buffer does not match M x D");
    }
    for (double v : ds.inputs) {
        if (!std::isfinite(v)) throw validation_error("dataset: non-finite input value");
    }
    for (int y : ds.labels) {
        if (y < 0 || y >= ds.num_classes) {
            throw validation_error("dataset: label " + std::to_string(y) + " out of range [0," +
                                   std::to_string(ds.num_classes) + ")");
        }
    }
}

namespace detail {

inline std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    std::array<unsigned char, 4> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), 4);
    if (!in) throw io_error("idx: truncated header in " + path);
    return (std::uint32_t{buf[0]} << 24) | (std::uint32_t{buf[1]} << 16) |
           (std::uint32_t{buf[2]} << 8) | std::uint32_t{buf[3]};
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw io_error("idx: cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw io_error("idx: cannot open " + labels_path);

    const std::uint32_t img_magic = detail::read_be_u32(img, images_path);
    if (img_magic != kIdxImagesMagic) {
        throw validation_error("idx: bad image magic in " + images_path + " (got " +
                               std::to_string(img_magic) + ", want 2051)");
    }
    const std::uint32_t lab_magic = detail::read_be_u32(lab, labels_path);
    if (lab_magic != kIdxLabelsMagic) {
        throw validation_error("idx: bad label magic in " + labels_path + " (got " +
                               std::to_string(lab_magic) + ", want 2049)");
    }
    const std::uint32_t n_img = detail::read_be_u32(img, images_path);
    const std::uint32_t rows = detail::read_be_u32(img, images_path);
    const std::uint32_t cols = detail::read_be_u32(img, images_path);
    const std::uint32_t n_lab = detail::read_be_u32(lab, labels_path);
    if (n_img != n_lab) {
        throw validation_error("idx: image count " + std::to_string(n_img) +
                               " != label count " + std::to_string(n_lab));
    }
    Dataset ds;
    ds.dim = static_cast<std::size_t>(rows) * cols;
    const std::size_t m = n_img;
    std::vector<unsigned char> pixel(ds.dim);
    ds.inputs.resize(m * ds.dim);
    for (std::size_t i = 0; i < m; ++i) {
        img.read(reinterpret_cast<char*>(pixel.data()), static_cast<std::streamsize>(ds.dim));
        if (!img) throw io_error("idx: truncated image data in " + images_path);
        for (std::size_t j = 0; j < ds.dim; ++j) {
            ds.inputs[i * ds.dim + j] = static_cast<double>(pixel[j]) / 255.0;
        }
    }
    ds.labels.resize(m);
    int max_label = 0;
    for (std::size_t i = 0; i < m; ++i) {
        char c = 0;
        lab.read(&c, 1);
        if (!lab) throw io_error("idx: truncated label data in " + labels_path);
        ds.labels[i] = static_cast<int>(static_cast<unsigned char>(c));
        if (ds.labels[i] > max_label) max_label = ds.labels[i];
    }
    ds.num_classes = max_label + 1;
    validate(ds);
    return ds;
}

struct SyntheticOptions {
    std::size_t dim = 2;  // regression input dimension; classification tasks are 2-D
    double noise = 1.0;   // multiplier on the task's canonical noise scale
};

// Tasks: two_gaussians (2 classes, means (+-1.5, 0), unit-variance noise),
// two_moons_like (interleaved half circles), noisy_linear_regression
// (y = x . w* + eps, w* retained in gen_weights).
inline Dataset make_synthetic(std::string_view task, std::size_t n, std::uint64_t seed,
                              SyntheticOptions opt = {}) {
    if (n < 4) throw validation_error("make_synthetic: need n >= 4, got " + std::to_string(n));
    rng::Stream rs(rng::derive(seed, 0xDA7Au));
    Dataset ds;
    if (task == "two_gaussians") {
        ds.dim = 2;
        ds.num_classes = 2;
        const double sigma = 1.0 * opt.noise;
        for (std::size_t i = 0; i < n; ++i) {
            const int y = static_cast<int>(i % 2);
            const double cx = y == 0 ? -1.5 : 1.5;
            ds.inputs.push_back(cx + sigma * rs.normal());
            ds.inputs.push_back(0.0 + sigma * rs.normal());
            ds.labels.push_back(y);
        }
    } else if (task == "two_moons_like") {
        ds.dim = 2;
        ds.num_classes = 2;
        const double sigma = 0.15 * opt.noise;
        for (std::size_t i = 0; i < n; ++i) {
            const int y = static_cast<int>(i % 2);
            const double t = std::numbers::pi * rs.uniform();
            double px, py;
            if (y == 0) {
                px = std::cos(t);
                py = std::sin(t);
            } else {
                px = 1.0 - std::cos(t);
                py = 0.5 - std::sin(t);
            }
            ds.inputs.push_back(px + sigma * rs.normal());
            ds.inputs.push_back(py + sigma * rs.normal());
            ds.labels.push_back(y);
        }
    } else if (task == "noisy_linear_regression") {
        ds.dim = opt.dim;
        const double sigma = 0.1 * opt.noise;
        ds.gen_weights.resize(ds.dim);
        for (double& w : ds.gen_weights) w = rs.normal();
        for (std::size_t i = 0; i < n; ++i) {
            double y = 0.0;
            for (std::size_t j = 0; j < ds.dim; ++j) {
                const double x = rs.normal();
                ds.inputs.push_back(x);
                y += x * ds.gen_weights[j];
            }
            ds.targets.push_back(y + sigma * rs.normal());
        }
    } else {
        throw validation_error("make_synthetic: unknown task '" + std::string(task) + "'");
    }
    return ds;
}

struct SplitSpec {
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

inline SplitIndices split(std::size_t m, const SplitSpec& spec) {
    if (spec.train_fraction <= 0 || spec.val_fraction <= 0 || spec.test_fraction <= 0) {
        throw validation_error("split: fractions must be positive");
    }
    if (std::abs(spec.train_fraction + spec.val_fraction + spec.test_fraction - 1.0) > 1e-9) {
        throw validation_error("split: fractions must sum to 1");
    }
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    rng::Stream rs(rng::derive(spec.seed, 0x5711u));
    rs.shuffle(perm);
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(m)));
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val_fraction * static_cast<double>(m)));
    SplitIndices out;
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                   perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    return out;
}

inline Dataset gather(const Dataset& ds, std::span<const std::size_t> idx) {
    Dataset out;
    out.dim = ds.dim;
    out.num_classes = ds.num_classes;
    out.gen_weights = ds.gen_weights;
    out.inputs.reserve(idx.size() * ds.dim);
    for (std::size_t i : idx) {
        auto r = ds.row(i);
        out.inputs.insert(out.inputs.end(), r.begin(), r.end());
        if (!ds.labels.empty()) out.labels.push_back(ds.labels[i]);
        if (!ds.targets.empty()) out.targets.push_back(ds.targets[i]);
    }
    return out;
}

}  // namespace hyperlearn
