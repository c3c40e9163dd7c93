#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "heatlab/space.hpp"

namespace heatlab {

enum class GaugeKind { ball_volume, power_of_ball_volume, capped_ball_volume, uniform_power, custom_table };

/// Declarative gauge description.
struct GaugeSpec {
    GaugeKind kind = GaugeKind::ball_volume;
    double alpha = 1.0;  ///< power_of_ball_volume: V(x, r^beta)^alpha
    double beta = 1.0;
    double r0 = 1.0;     ///< capped_ball_volume: V(x, min(r, r0))
    double n = 1.0;      ///< uniform_power: r^n
    /// custom_table: values[x][k] at radii[k]; step interpolation from the left.
    std::vector<double> radii;
    std::vector<std::vector<double>> values;
};

inline std::string gauge_name(const GaugeSpec& g) {
    auto num = [](double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    };
    switch (g.kind) {
    case GaugeKind::ball_volume: return "V";
    case GaugeKind::power_of_ball_volume: return "V^" + num(g.alpha) + "(r^" + num(g.beta) + ")";
    case GaugeKind::capped_ball_volume: return "V(min(r," + num(g.r0) + "))";
    case GaugeKind::uniform_power: return "r^" + num(g.n);
    case GaugeKind::custom_table: return "table";
    }
    return "gauge";
}

/// Build the gauge described by `spec` on `s`.
inline VolumeGauge make_gauge(const MetricMeasureSpace& s, const GaugeSpec& spec) {
    const std::string name = gauge_name(spec);
    switch (spec.kind) {
    case GaugeKind::ball_volume: return VolumeGauge(name, [s](Index x, double r) { return ball_volume(s, x, r); });
    case GaugeKind::power_of_ball_volume: {
        if (!(spec.alpha > 0.0) || !(spec.beta > 0.0)) throw InputError("power_of_ball_volume: alpha, beta > 0");
        const double a = spec.alpha, b = spec.beta;
        return VolumeGauge(name, [s, a, b](Index x, double r) { return std::pow(ball_volume(s, x, std::pow(r, b)), a); });
    }
    case GaugeKind::capped_ball_volume: {
        if (!(spec.r0 > 0.0)) throw InputError("capped_ball_volume: r0 > 0");
        const double r0 = spec.r0;
        return VolumeGauge(name, [s, r0](Index x, double r) { return ball_volume(s, x, std::min(r, r0)); });
    }
    case GaugeKind::uniform_power: {
        if (!(spec.n >= 0.0)) throw InputError("uniform_power: n >= 0");
        const double n = spec.n;
        return VolumeGauge(name, [n](Index, double r) { return std::pow(r, n); });
    }
    case GaugeKind::custom_table: {
        if (spec.radii.empty() || static_cast<Index>(spec.values.size()) != s.size())
            throw InputError("custom_table: need radii and one row of values per vertex");
        if (!std::is_sorted(spec.radii.begin(), spec.radii.end()))
            throw InputError("custom_table: radii must be ascending");
        for (const auto& row : spec.values) {
            if (row.size() != spec.radii.size()) throw InputError("custom_table: row length differs from radii");
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (!(row[k] > 0.0)) throw InputError("custom_table: values must be positive");
                if (k && row[k] < row[k - 1]) throw InputError("custom_table: values must be nondecreasing in r");
            }
        }
        const auto radii = spec.radii;
        const auto values = spec.values;
        return VolumeGauge(name, [radii, values](Index x, double r) {
            const auto it = std::upper_bound(radii.begin(), radii.end(), r);
            const std::size_t k = it == radii.begin() ? 0 : static_cast<std::size_t>(it - radii.begin()) - 1;
            return values[static_cast<std::size_t>(x)][k];
        });
    }
    }
    throw InputError("unknown gauge kind");
}

/// Constant gauge v ≡ 1.
inline VolumeGauge unit_gauge() {
    return VolumeGauge("1", [](Index, double) { return 1.0; });
}

} // namespace heatlab
