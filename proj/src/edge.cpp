#include "energyshield/edge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "energyshield/errors.hpp"

namespace energyshield {

void ChannelConfig::validate() const {
    if (!(sigma_phi > 0.0)) throw ConfigError("channel: sigma_phi must be positive");
    if (!(data_size > 0.0)) throw ConfigError("channel: data_size must be positive");
    if (!(server_compute >= 0.0)) throw ConfigError("channel: server_compute must be nonnegative");
    if (!(phi_min > 0.0)) throw ConfigError("channel: phi_min must be positive");
}

void QueueConfig::validate() const {
    if (C < 1) throw ConfigError("queue: C must be at least 1");
    if (!(rho_load > 0.0 && rho_load < 1.0)) throw ConfigError("queue: rho_load must lie in (0, 1)");
    if (!(per_task_delay >= 0.0)) throw ConfigError("queue: per_task_delay must be nonnegative");
}

void EnergyConfig::validate() const {
    if (!(E_local_inference >= 0.0) || !(P_tx >= 0.0) || !(P_idle >= 0.0))
        throw ConfigError("energy: values must be nonnegative");
}

double rayleigh_from_uniform(double u, double sigma_phi) {
    return sigma_phi * std::sqrt(-2.0 * std::log1p(-u));
}

double sample_throughput(Rng& rng, const ChannelConfig& ch) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return std::max(rayleigh_from_uniform(unit(rng), ch.sigma_phi), ch.phi_min);
}

std::vector<double> queue_pmf(const QueueConfig& q) {
    const long double rho = q.rho_load;
    const long double norm = (1.0L - rho) / (1.0L - std::pow(rho, static_cast<long double>(q.C + 1)));
    std::vector<double> pmf(static_cast<std::size_t>(q.C) + 1);
    long double p = norm;
    for (int c = 0; c <= q.C; ++c) {
        pmf[static_cast<std::size_t>(c)] = static_cast<double>(p);
        p *= rho;
    }
    return pmf;
}

double expected_queue_delay(const QueueConfig& q) {
    const auto pmf = queue_pmf(q);
    long double m = 0.0L;
    for (std::size_t c = 0; c < pmf.size(); ++c) m += static_cast<long double>(c) * pmf[c];
    return static_cast<double>(m) * q.per_task_delay;
}

QueueSampler::QueueSampler(const QueueConfig& q) : _q(q) {
    const auto pmf = queue_pmf(q);
    _cdf.resize(pmf.size());
    long double acc = 0.0L;
    for (std::size_t c = 0; c < pmf.size(); ++c) {
        acc += pmf[c];
        _cdf[c] = static_cast<double>(acc);
    }
    _cdf.back() = 1.0;
}

int QueueSampler::sample_position(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    const auto it = std::upper_bound(_cdf.begin(), _cdf.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - _cdf.begin(), _q.C));
}

double QueueSampler::sample_delay(Rng& rng) const { return sample_position(rng) * _q.per_task_delay; }

double sample_queue_delay(Rng& rng, const QueueConfig& q) { return QueueSampler(q).sample_delay(rng); }

double transmit_time(double throughput, const ChannelConfig& ch) { return ch.data_size / (throughput * 1e6); }

Response realize_response_time(Rng& rng, const ChannelConfig& ch, const QueueSampler& queue) {
    Response r;
    r.sample.throughput = sample_throughput(rng, ch);
    r.sample.queue_delay = queue.sample_delay(rng);
    r.tx_time = transmit_time(r.sample.throughput, ch);
    r.latency = r.tx_time + r.sample.queue_delay + ch.server_compute;
    return r;
}

Response realize_response_time(Rng& rng, const ChannelConfig& ch, const QueueConfig& q) {
    return realize_response_time(rng, ch, QueueSampler(q));
}

int latency_to_samples(double latency, double T) {
    // tolerance keeps exact multiples from rounding up
    const double k = std::ceil(latency / T - 1e-9);
    return std::max(1, static_cast<int>(k));
}

void ResponseHistory::push(const ChannelSample& s) {
    if (_items.size() == _k) _items.erase(_items.begin());
    _items.push_back(s);
}

double ResponseHistory::mean_throughput() const {
    double m = 0.0;
    for (const auto& s : _items) m += s.throughput;
    return _items.empty() ? 0.0 : m / _items.size();
}

double ResponseHistory::mean_queue_delay() const {
    double m = 0.0;
    for (const auto& s : _items) m += s.queue_delay;
    return _items.empty() ? 0.0 : m / _items.size();
}

double estimate_latency(const ResponseHistory& hist, const ChannelConfig& ch, double prior_queue_delay) {
    if (hist.empty()) {
        const double phi = ch.sigma_phi * std::sqrt(std::numbers::pi / 2.0);
        return transmit_time(phi, ch) + prior_queue_delay + ch.server_compute;
    }
    return transmit_time(hist.mean_throughput(), ch) + hist.mean_queue_delay() + ch.server_compute;
}

double estimate_latency(const ResponseHistory& hist, const ChannelConfig& ch, const QueueConfig& q) {
    return estimate_latency(hist, ch, hist.empty() ? expected_queue_delay(q) : 0.0);
}

int estimate_delta_hat(const ResponseHistory& hist, const ChannelConfig& ch, double prior_queue_delay, double T) {
    return latency_to_samples(estimate_latency(hist, ch, prior_queue_delay), T);
}

int estimate_delta_hat(const ResponseHistory& hist, const ChannelConfig& ch, const QueueConfig& q, double T) {
    return latency_to_samples(estimate_latency(hist, ch, q), T);
}

double window_energy(EnergyMode mode, const EnergyConfig& e, double T, double t_tx) {
    switch (mode) {
        case EnergyMode::LocalInference: return e.E_local_inference;
        case EnergyMode::Transmit: return e.P_tx * t_tx * 1000.0;
        case EnergyMode::Idle: return e.P_idle * T * 1000.0;
    }
    return 0.0;
}

}  // namespace energyshield
