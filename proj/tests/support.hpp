#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "mdfl/data/dataset.hpp"
#include "mdfl/data/synthetic.hpp"
#include "mdfl/numeric/model.hpp"

namespace testing {

// Tiny generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    std::vector<double> reals(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = real(lo, hi);
        return v;
    }

    mdfl::Matrix matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
        mdfl::Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = real(lo, hi);
        return m;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline mdfl::Batch random_batch(Gen& g, std::size_t n, std::size_t dim, int classes) {
    mdfl::Batch b;
    b.inputs = g.matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim), -2.0, 2.0);
    for (std::size_t i = 0; i < n; ++i) b.labels.push_back(g.integer(0, classes - 1));
    return b;
}

inline mdfl::SynthConfig small_synth(int users = 4, int devices = 2, int classes = 3, int per_class = 10,
                                     std::uint64_t seed = 1) {
    mdfl::SynthConfig c;
    c.num_users = users;
    c.devices_per_user = devices;
    c.num_classes = classes;
    c.windows_per_class = per_class;
    c.channels = 3;
    c.window_len = 4;
    c.seed = seed;
    return c;
}

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("mdfl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
