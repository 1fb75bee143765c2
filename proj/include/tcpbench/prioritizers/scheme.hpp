#pragma once

// Uniform contract over the nine schemes, selected by id string.

#include <array>
#include <memory>
#include <optional>
#include <string_view>

#include "tcpbench/prioritizers/baseline.hpp"
#include "tcpbench/prioritizers/cofailure.hpp"
#include "tcpbench/prioritizers/flip.hpp"
#include "tcpbench/prioritizers/history_metrics.hpp"
#include "tcpbench/prioritizers/terminator.hpp"

namespace tcpbench {

enum class SchemeId : std::uint8_t { A1, A2, B1, B2, B3, B4, C1, C2, D1 };

inline constexpr std::array<SchemeId, 9> all_schemes{SchemeId::A1, SchemeId::A2, SchemeId::B1,
                                                     SchemeId::B2, SchemeId::B3, SchemeId::B4,
                                                     SchemeId::C1, SchemeId::C2, SchemeId::D1};

inline std::string_view to_string(SchemeId id) {
    constexpr std::array<std::string_view, 9> names{"A1", "A2", "B1", "B2", "B3", "B4", "C1", "C2", "D1"};
    return names[static_cast<std::size_t>(id)];
}

inline std::optional<SchemeId> parse_scheme(std::string_view s) {
    auto key = detail::lower(detail::trim(s));
    for (auto id : all_schemes)
        if (detail::lower(to_string(id)) == key) return id;
    return std::nullopt;
}

/// Stable per-scheme label used when deriving seeds, so adding a scheme
/// never changes another scheme's random stream.
inline std::uint64_t seed_label(SchemeId id) { return fnv1a(to_string(id)); }

struct SchemeParams {
    DecayParams decay{};
    RocketWeights rocket{};
    CoFailureOptions cofailure{};
    TerminatorConfig terminator{};
};

class Prioritizer {
public:
    virtual ~Prioritizer() = default;

    virtual SchemeId id() const = 0;
    /// Carries state from one build to the next; must be replayed in order.
    virtual bool stateful() const { return false; }
    /// Learns outcomes of the current build through the oracle while ordering.
    virtual bool adaptive() const { return false; }

    /// Orders the tests of the oracle's build using only `prior`. Adaptive
    /// schemes reveal every test they place.
    virtual Ordering prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle, std::uint64_t seed,
                                const Deadline& deadline) = 0;
};

namespace schemes {

class Random final : public Prioritizer {
public:
    SchemeId id() const override { return SchemeId::A1; }
    Ordering prioritize(const HistoryPrefix&, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline&) override {
        return prioritize_random(oracle.tests(), seed);
    }
};

class Optimal final : public Prioritizer {
public:
    SchemeId id() const override { return SchemeId::A2; }
    Ordering prioritize(const HistoryPrefix&, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline&) override {
        return prioritize_optimal(oracle, seed);
    }
};

class TimeSinceLastFailure final : public Prioritizer {
public:
    SchemeId id() const override { return SchemeId::B1; }
    Ordering prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline&) override {
        return prioritize_time_since_last_failure(prior, oracle.tests(), seed);
    }
};

class FailureRate final : public Prioritizer {
public:
    SchemeId id() const override { return SchemeId::B2; }
    Ordering prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline&) override {
        return prioritize_failure_rate(prior, oracle.tests(), seed);
    }
};

class ExpDecay final : public Prioritizer {
public:
    explicit ExpDecay(DecayParams p) : p_(p) { p_.validate(); }
    SchemeId id() const override { return SchemeId::B3; }
    Ordering prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline&) override {
        return prioritize_exp_decay(prior, oracle.tests(), p_, seed);
    }

private:
    DecayParams p_;
};

class Rocket final : public Prioritizer {
public:
    explicit Rocket(RocketWeights w) : w_(w) { w_.validate(); }
    SchemeId id() const override { return SchemeId::B4; }
    Ordering prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline&) override {
        return prioritize_rocket(prior, oracle.tests(), w_, seed);
    }

private:
    RocketWeights w_;
};

class CoFailure final : public Prioritizer {
public:
    explicit CoFailure(CoFailureOptions opts, CoFailureState initial = {})
        : opts_(opts), state_(std::move(initial)) {}
    SchemeId id() const override { return SchemeId::C1; }
    bool stateful() const override { return true; }
    bool adaptive() const override { return true; }
    Ordering prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline& deadline) override {
        auto r = cofailure_prioritize(prior, oracle, state_, seed, opts_, deadline);
        state_ = std::move(r.state);
        return std::move(r.ordering);
    }

    const CoFailureState& state() const noexcept { return state_; }
    void restore(CoFailureState s) { state_ = std::move(s); }

private:
    CoFailureOptions opts_;
    CoFailureState state_;
};

class FlipCorrelation final : public Prioritizer {
public:
    explicit FlipCorrelation(RocketWeights w) : w_(w) { w_.validate(); }
    SchemeId id() const override { return SchemeId::C2; }
    bool adaptive() const override { return true; }
    Ordering prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline& deadline) override {
        return flip_correlation_prioritize(prior, oracle, w_, seed, deadline).ordering;
    }

private:
    RocketWeights w_;
};

class Terminator final : public Prioritizer {
public:
    explicit Terminator(TerminatorConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        cfg_.keep_trace = false;
    }
    SchemeId id() const override { return SchemeId::D1; }
    bool adaptive() const override { return true; }
    Ordering prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle, std::uint64_t seed,
                        const Deadline& deadline) override {
        return terminator_prioritize(prior, oracle, cfg_, seed, deadline).ordering;
    }

private:
    TerminatorConfig cfg_;
};

} // namespace schemes

inline std::unique_ptr<Prioritizer> make_prioritizer(SchemeId id, const SchemeParams& p = {}) {
    switch (id) {
    case SchemeId::A1: return std::make_unique<schemes::Random>();
    case SchemeId::A2: return std::make_unique<schemes::Optimal>();
    case SchemeId::B1: return std::make_unique<schemes::TimeSinceLastFailure>();
    case SchemeId::B2: return std::make_unique<schemes::FailureRate>();
    case SchemeId::B3: return std::make_unique<schemes::ExpDecay>(p.decay);
    case SchemeId::B4: return std::make_unique<schemes::Rocket>(p.rocket);
    case SchemeId::C1: return std::make_unique<schemes::CoFailure>(p.cofailure);
    case SchemeId::C2: return std::make_unique<schemes::FlipCorrelation>(p.rocket);
    case SchemeId::D1: return std::make_unique<schemes::Terminator>(p.terminator);
    }
    throw Error("unknown scheme");
}

} // namespace tcpbench
