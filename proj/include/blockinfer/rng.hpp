#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace blockinfer {

/// Platform-independent random streams: mt19937_64 underneath, with our own
/// uniform/normal transforms so draws do not depend on the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Seed for an independent sub-stream (e.g. one replication).
    static std::uint64_t derive(std::uint64_t master, std::uint64_t index);

    std::uint64_t bits() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace blockinfer
