#include "nepvi/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nepvi {

namespace {

// Shortest round-trip representation so identical runs give identical bytes.
std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string Trajectory::to_csv() const {
    std::ostringstream os;
    os << "iter,player,step_norm,nat_residual,metric,outer_iter,eps_n,merit\n";
    for (const auto& r : records) {
        const int np = static_cast<int>(std::max(r.player_step.size(), r.nat_residual.size()));
        for (int p = 0; p < std::max(np, 1); ++p) {
            os << r.iter << ',' << (np ? std::to_string(p) : std::string("-1")) << ','
               << num(p < r.player_step.size() ? r.player_step(p) : r.step_norm) << ','
               << num(p < r.nat_residual.size() ? r.nat_residual(p)
                                                : std::numeric_limits<double>::quiet_NaN())
               << ',' << num(r.metric) << ',' << r.outer_iter << ',' << num(r.eps_n) << ','
               << num(r.merit) << '\n';
        }
    }
    return os.str();
}

void Trajectory::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write trajectory to " + path);
    f << to_csv();
}

}  // namespace nepvi
