#include "nepvi/schedule.hpp"

#include "json.hpp"

#include <algorithm>
#include <random>

namespace nepvi {

Schedule Schedule::jacobi(int players, int horizon) {
    require(players >= 1, "schedule: need at least one player");
    require(horizon >= 1, "schedule: horizon must be positive");
    Schedule s;
    s.kind_ = Kind::Jacobi;
    s.players_ = players;
    s.horizon_ = horizon;
    s.window_ = 1;
    return s;
}

Schedule Schedule::gauss_seidel(int players, int horizon) {
    Schedule s = jacobi(players, horizon);
    s.kind_ = Kind::GaussSeidel;
    s.window_ = players;
    return s;
}

Schedule Schedule::random_delay(int players, int horizon, int max_delay, std::uint64_t seed,
                                int window) {
    require(players >= 1, "schedule: need at least one player");
    require(max_delay >= 0, "schedule: max_delay must be nonnegative");
    if (max_delay >= horizon) throw Error("schedule: max_delay must be smaller than the horizon");
    Schedule s;
    s.kind_ = Kind::Random;
    s.players_ = players;
    s.horizon_ = horizon;
    s.max_delay_ = max_delay;
    s.window_ = window > 0 ? window : 2 * players;
    s.seed_ = seed;

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    const std::size_t I = static_cast<std::size_t>(players);
    s.update_.assign(static_cast<std::size_t>(horizon) * I, 0);
    s.delay_.assign(static_cast<std::size_t>(horizon) * I * I, 0);
    std::vector<int> last(players, -1);
    for (int n = 0; n < horizon; ++n) {
        for (int i = 0; i < players; ++i) {
            const bool forced = n - last[i] >= s.window_;
            const bool up = coin(rng) || forced;
            s.update_[n * I + i] = up ? 1 : 0;
            if (up) last[i] = n;
            const int dmax = std::min(max_delay, n);
            std::uniform_int_distribution<int> dd(0, dmax);
            for (int j = 0; j < players; ++j) {
                const int d = dd(rng);
                s.delay_[(n * I + i) * I + j] = (j == i) ? 0 : d;
            }
        }
    }
    s.validate();
    return s;
}

bool Schedule::updates(int n, int i) const {
    switch (kind_) {
        case Kind::Jacobi: return true;
        case Kind::GaussSeidel: return n >= 1 && (n - 1) % players_ == i;
        case Kind::Random:
            if (n >= horizon_) return true;
            return update_[static_cast<std::size_t>(n) * players_ + i] != 0;
    }
    return true;
}

int Schedule::tau(int n, int i, int j) const {
    if (kind_ != Kind::Random || n >= horizon_) return n;
    const std::size_t I = static_cast<std::size_t>(players_);
    return n - delay_[(static_cast<std::size_t>(n) * I + i) * I + j];
}

int Schedule::sweep_length() const {
    switch (kind_) {
        case Kind::Jacobi: return 1;
        case Kind::GaussSeidel: return players_;
        case Kind::Random: return window_ + max_delay_;
    }
    return 1;
}

void Schedule::validate() const {
    if (kind_ != Kind::Random) return;
    require(max_delay_ < horizon_, "schedule: max_delay must be smaller than the horizon");
    std::vector<int> last(players_, -1);
    for (int n = 0; n < horizon_; ++n) {
        for (int i = 0; i < players_; ++i) {
            for (int j = 0; j < players_; ++j) {
                const int t = tau(n, i, j);
                if (t < 0 || t > n) throw Error("schedule violates A1 at n=" + std::to_string(n));
                if (n - t > max_delay_)
                    throw Error("schedule staleness exceeds max_delay at n=" + std::to_string(n));
            }
            if (updates(n, i)) last[i] = n;
            if (n - last[i] >= window_)
                throw Error("schedule: player " + std::to_string(i) + " idle for a full window at n=" +
                            std::to_string(n));
        }
    }
}

std::string Schedule::to_json() const {
    nlohmann::json j;
    j["kind"] = kind_ == Kind::Jacobi ? "jacobi" : kind_ == Kind::GaussSeidel ? "gauss-seidel" : "async";
    j["players"] = players_;
    j["horizon"] = horizon_;
    j["max_delay"] = max_delay_;
    j["window"] = window_;
    j["seed"] = seed_;
    if (kind_ == Kind::Random) {
        j["updates"] = update_;
        j["delays"] = delay_;
    }
    return j.dump();
}

Schedule Schedule::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const std::string kind = j.at("kind").get<std::string>();
    const int players = j.at("players").get<int>();
    const int horizon = j.at("horizon").get<int>();
    if (kind == "jacobi") return jacobi(players, horizon);
    if (kind == "gauss-seidel") return gauss_seidel(players, horizon);
    require(kind == "async", "schedule JSON: unknown kind '" + kind + "'");
    Schedule s;
    s.kind_ = Kind::Random;
    s.players_ = players;
    s.horizon_ = horizon;
    s.max_delay_ = j.at("max_delay").get<int>();
    s.window_ = j.at("window").get<int>();
    s.seed_ = j.at("seed").get<std::uint64_t>();
    if (j.contains("updates")) {
        s.update_ = j.at("updates").get<std::vector<std::uint8_t>>();
        s.delay_ = j.at("delays").get<std::vector<std::int32_t>>();
        const std::size_t I = static_cast<std::size_t>(players);
        require(s.update_.size() == static_cast<std::size_t>(horizon) * I &&
                    s.delay_.size() == static_cast<std::size_t>(horizon) * I * I,
                "schedule JSON: stored arrays have the wrong length");
    } else {
        s = random_delay(players, horizon, s.max_delay_, s.seed_, s.window_);
    }
    s.validate();
    return s;
}

bool Schedule::operator==(const Schedule& o) const {
    return kind_ == o.kind_ && players_ == o.players_ && horizon_ == o.horizon_ &&
           max_delay_ == o.max_delay_ && window_ == o.window_ && seed_ == o.seed_ &&
           update_ == o.update_ && delay_ == o.delay_;
}

}  // namespace nepvi
