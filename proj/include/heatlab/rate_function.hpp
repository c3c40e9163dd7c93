#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>
#include <nlohmann/json.hpp>

#include "heatlab/dumps.hpp"
#include "heatlab/errors.hpp"

namespace heatlab {

/// y ≈ coeff·x^exponent.
struct PowerTail {
    double exponent = 0.0;
    double coeff = 1.0;
    double operator()(double x) const { return coeff * std::pow(x, exponent); }
};

/// Positive function of one positive variable from samples.
///
/// Inside the sampled range values come from monotone cubic interpolation of
/// (log x, log y); outside, from power laws fitted on the first and last decade and
/// anchored at the end samples so the extension is continuous.
class RateFunction {
public:
    RateFunction() = default;

    RateFunction(std::vector<double> x, std::vector<double> y, std::string name = {})
        : x_(std::move(x)), y_(std::move(y)), name_(std::move(name)) {
        if (x_.size() != y_.size() || x_.size() < 2) throw InputError("RateFunction: need >= 2 paired samples");
        std::vector<std::size_t> idx(x_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x_[a] < x_[b]; });
        std::vector<double> xs, ys;
        for (std::size_t i : idx) {
            xs.push_back(x_[i]);
            ys.push_back(y_[i]);
        }
        x_ = std::move(xs);
        y_ = std::move(ys);
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (!(x_[i] > 0.0) || !std::isfinite(x_[i])) throw InputError("RateFunction: abscissae must be positive");
            if (!(y_[i] > 0.0) || !std::isfinite(y_[i]))
                throw InputError("RateFunction '" + name_ + "': values must be positive and finite");
            if (i && !(x_[i] > x_[i - 1])) throw InputError("RateFunction: repeated abscissa");
        }
        for (std::size_t i = 0; i < x_.size(); ++i) {
            lx_.push_back(std::log(x_[i]));
            ly_.push_back(std::log(y_[i]));
        }
        if (x_.size() >= 4) {
            spline_ = std::make_shared<Pchip>(std::vector<double>(lx_), std::vector<double>(ly_));
        }
        lo_ = fit_tail(true);
        hi_ = fit_tail(false);
    }

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    const std::string& name() const { return name_; }
    const PowerTail& low_tail() const { return lo_; }
    const PowerTail& high_tail() const { return hi_; }
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

    double operator()(double x) const {
        if (!(x > 0.0)) throw InputError("RateFunction: argument must be > 0");
        if (x <= x_.front()) return x == x_.front() ? y_.front() : lo_(x);
        if (x >= x_.back()) return x == x_.back() ? y_.back() : hi_(x);
        return std::exp(log_interp(std::log(x)));
    }

    /// d log y / d log x.
    double log_slope(double x) const {
        if (x < x_.front()) return lo_.exponent;
        if (x > x_.back()) return hi_.exponent;
        if (spline_) return spline_->prime(std::log(x));
        const std::size_t k = segment(std::log(x));
        return (ly_[k + 1] - ly_[k]) / (lx_[k + 1] - lx_[k]);
    }

    double derivative(double x) const { return (*this)(x) / x * log_slope(x); }

    bool increasing() const {
        for (std::size_t i = 1; i < y_.size(); ++i)
            if (!(y_[i] > y_[i - 1])) return false;
        return lo_.exponent > 0.0 && hi_.exponent > 0.0;
    }

    bool decreasing() const {
        for (std::size_t i = 1; i < y_.size(); ++i)
            if (!(y_[i] < y_[i - 1])) return false;
        return lo_.exponent < 0.0 && hi_.exponent < 0.0;
    }

    /// x with f(x) = y for a strictly monotone f; tails are inverted in closed form.
    double inverse(double y) const {
        if (!(y > 0.0)) throw InputError("RateFunction::inverse: value must be > 0");
        const bool inc = increasing();
        if (!inc && !decreasing()) throw InputError("RateFunction::inverse: '" + name_ + "' is not monotone");
        const bool below = inc ? y < y_.front() : y > y_.front();
        const bool above = inc ? y > y_.back() : y < y_.back();
        if (below || y == y_.front()) return y == y_.front() ? x_.front() : std::pow(y / lo_.coeff, 1.0 / lo_.exponent);
        if (above || y == y_.back()) return y == y_.back() ? x_.back() : std::pow(y / hi_.coeff, 1.0 / hi_.exponent);
        const double ly = std::log(y);
        auto fn = [&](double u) { return log_interp(u) - ly; };
        std::uintmax_t it = 200;
        const auto r = boost::math::tools::toms748_solve(fn, lx_.front(), lx_.back(), fn(lx_.front()), fn(lx_.back()),
                                                         boost::math::tools::eps_tolerance<double>(52), it);
        return std::exp(0.5 * (r.first + r.second));
    }

    /// θ(τ)/τ nondecreasing over the samples.
    bool ratio_nondecreasing(double rel_tol = 1e-12) const {
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (y_[i] / x_[i] < y_[i - 1] / x_[i - 1] * (1 - rel_tol)) return false;
        return true;
    }

    /// Samples as "x,value" CSV rows with a header.
    void write_csv(std::ostream& os) const {
        os << "x,value\n";
        for (std::size_t i = 0; i < x_.size(); ++i) os << shortest(x_[i]) << ',' << shortest(y_[i]) << '\n';
    }

    /// Log-log columns for plotting.
    void write_loglog_csv(std::ostream& os) const {
        os << "log10_x,log10_value\n";
        for (std::size_t i = 0; i < x_.size(); ++i)
            os << shortest(std::log10(x_[i])) << ',' << shortest(std::log10(y_[i])) << '\n';
    }

    nlohmann::json tail_json() const {
        return {{"name", name_},
                {"interpolation", "pchip on (log x, log y)"},
                {"range", {x_.front(), x_.back()}},
                {"low_tail", {{"exponent", lo_.exponent}, {"coeff", lo_.coeff}}},
                {"high_tail", {{"exponent", hi_.exponent}, {"coeff", hi_.coeff}}}};
    }

private:
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

    std::size_t segment(double u) const {
        const auto it = std::upper_bound(lx_.begin(), lx_.end(), u);
        std::size_t k = static_cast<std::size_t>(it - lx_.begin());
        k = k == 0 ? 0 : k - 1;
        return std::min(k, lx_.size() - 2);
    }

    double log_interp(double u) const {
        if (spline_) return (*spline_)(u);
        const std::size_t k = segment(u);
        const double s = (u - lx_[k]) / (lx_[k + 1] - lx_[k]);
        return ly_[k] + s * (ly_[k + 1] - ly_[k]);
    }

    // least-squares slope on one decade at the given end, anchored at the end sample
    PowerTail fit_tail(bool low) const {
        const std::size_t n = x_.size();
        std::vector<double> u, w;
        for (std::size_t i = 0; i < n; ++i) {
            const bool in = low ? x_[i] <= 10.0 * x_.front() : x_[i] >= x_.back() / 10.0;
            if (in) {
                u.push_back(lx_[i]);
                w.push_back(ly_[i]);
            }
        }
        if (u.size() < 2) {
            u = low ? std::vector<double>{lx_[0], lx_[1]} : std::vector<double>{lx_[n - 2], lx_[n - 1]};
            w = low ? std::vector<double>{ly_[0], ly_[1]} : std::vector<double>{ly_[n - 2], ly_[n - 1]};
        }
        double mu = 0, mw = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            mu += u[i];
            mw += w[i];
        }
        mu /= static_cast<double>(u.size());
        mw /= static_cast<double>(u.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            sxy += (u[i] - mu) * (w[i] - mw);
            sxx += (u[i] - mu) * (u[i] - mu);
        }
        PowerTail t;
        t.exponent = sxy / sxx;
        const std::size_t a = low ? 0 : n - 1;
        t.coeff = std::exp(ly_[a] - t.exponent * lx_[a]);
        return t;
    }

    std::vector<double> x_, y_, lx_, ly_;
    std::string name_;
    std::shared_ptr<Pchip> spline_;
    PowerTail lo_, hi_;
};

/// Samples of f on a grid as a RateFunction.
template <class F>
RateFunction sample_rate(F&& f, const std::vector<double>& grid, std::string name = {}) {
    std::vector<double> y;
    y.reserve(grid.size());
    for (double x : grid) y.push_back(f(x));
    return RateFunction(grid, std::move(y), std::move(name));
}

} // namespace heatlab
