#pragma once

// Linear soft-margin SVM (hinge loss) trained by dual coordinate descent,
// with the bias folded in as a constant feature. Dual variables and the
// weight vector survive between fit() calls, so retraining after one more
// labelled sample starts from the previous solution.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

namespace tcpbench {

struct TrainingExample {
    std::uint32_t id;
    std::span<const double> features;
    int label;  // +1 or -1
};

class LinearSvm {
public:
    struct Params {
        double c = 1.0;
        std::size_t max_passes = 50;
        /// Stop once the projected-gradient spread of a pass falls below this.
        double eps = 0.1;
    };

    LinearSvm() = default;
    explicit LinearSvm(Params p) : params_(p) {}

    /// Samples are identified by id; an id must keep the same feature vector
    /// for the lifetime of the model.
    void fit(std::span<const TrainingExample> data) {
        ++generation_;
        if (!data.empty() && w_.size() != data.front().features.size()) {
            w_.assign(data.front().features.size(), 0.0);
            bias_ = 0.0;
            duals_.clear();
        }
        active_.clear();
        for (const auto& ex : data) {
            auto& slot = duals_[ex.id];
            if (slot.label != ex.label) {
                if (slot.alpha != 0.0) add(slot, -slot.alpha);
                slot.label = ex.label;
                slot.alpha = 0.0;
                slot.x.assign(ex.features.begin(), ex.features.end());
                slot.q = 1.0;
                for (double v : slot.x) slot.q += v * v;
            }
            slot.generation = generation_;
            active_.push_back(&slot);
        }
        // Samples dropped from the training set stop contributing.
        for (auto it = duals_.begin(); it != duals_.end();) {
            if (it->second.generation != generation_) {
                if (it->second.alpha != 0.0) add(it->second, -it->second.alpha);
                it = duals_.erase(it);
            } else {
                ++it;
            }
        }

        for (std::size_t pass = 0; pass < params_.max_passes; ++pass) {
            double pg_max = -std::numeric_limits<double>::infinity();
            double pg_min = std::numeric_limits<double>::infinity();
            for (auto* d : active_) {
                double g = d->label * decision(d->x) - 1.0;
                double a = d->alpha;
                double pg = g;
                if (a <= 0.0) pg = std::min(g, 0.0);
                else if (a >= params_.c) pg = std::max(g, 0.0);
                pg_max = std::max(pg_max, pg);
                pg_min = std::min(pg_min, pg);
                if (pg == 0.0) continue;
                double next = std::clamp(a - g / d->q, 0.0, params_.c);
                if (next == a) continue;
                add(*d, next - a);
                d->alpha = next;
            }
            if (pg_max - pg_min <= params_.eps) break;
        }
    }

    double decision(std::span<const double> x) const {
        double s = bias_;
        for (std::size_t k = 0; k < w_.size() && k < x.size(); ++k) s += w_[k] * x[k];
        return s;
    }

    /// Logistic squashing of the signed margin.
    double probability(std::uint32_t, std::span<const double> x) const {
        return 1.0 / (1.0 + std::exp(-decision(x)));
    }

    std::span<const double> weights() const noexcept { return w_; }
    double bias() const noexcept { return bias_; }

private:
    struct Dual {
        int label = 0;
        double alpha = 0.0;
        double q = 1.0;
        std::uint64_t generation = 0;
        std::vector<double> x;
    };

    void add(const Dual& d, double delta_alpha) {
        double s = delta_alpha * d.label;
        for (std::size_t k = 0; k < w_.size(); ++k) w_[k] += s * d.x[k];
        bias_ += s;
    }

    Params params_{};
    std::vector<double> w_;
    double bias_ = 0.0;
    std::unordered_map<std::uint32_t, Dual> duals_;
    std::vector<Dual*> active_;
    std::uint64_t generation_ = 0;
};

} // namespace tcpbench
