#pragma once

#include "nepvi/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nepvi {

// Deterministic model of asynchronous updates. Iterations are numbered from 0;
// at iteration n the players in T(n) update, reading player j's block from
// iterate tau(n, i, j) <= n.
class Schedule {
public:
    enum class Kind { Jacobi, GaussSeidel, Random };

    static Schedule jacobi(int players, int horizon);
    static Schedule gauss_seidel(int players, int horizon);
    // Each player updates with probability 1/2 and at least once every
    // `window` iterations; staleness is uniform on [0, min(max_delay, n)].
    static Schedule random_delay(int players, int horizon, int max_delay, std::uint64_t seed,
                                 int window = 0);

    Kind kind() const { return kind_; }
    int players() const { return players_; }
    int horizon() const { return horizon_; }
    int max_delay() const { return max_delay_; }
    int window() const { return window_; }
    std::uint64_t seed() const { return seed_; }

    bool updates(int n, int i) const;
    int tau(int n, int i, int j) const;

    // Number of consecutive iterations over which every player is guaranteed
    // to have updated at least once reading only iterates from inside it.
    int sweep_length() const;

    // A1: 0 <= tau <= n. A2: staleness <= max_delay. A3: every player updates
    // in every window of length `window` that fits in the horizon.
    void validate() const;

    // JSON text; random schedules carry their full update/delay tables so a
    // replay does not depend on the generator.
    std::string to_json() const;
    static Schedule from_json(const std::string& text);

    bool operator==(const Schedule& o) const;

private:
    Kind kind_ = Kind::Jacobi;
    int players_ = 0;
    int horizon_ = 0;
    int max_delay_ = 0;
    int window_ = 1;
    std::uint64_t seed_ = 0;
    std::vector<std::uint8_t> update_;   // random only: [n * I + i]
    std::vector<std::int32_t> delay_;    // random only: [(n * I + i) * I + j]
};

}  // namespace nepvi
