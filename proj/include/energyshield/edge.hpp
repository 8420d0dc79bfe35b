#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace energyshield {

using Rng = std::mt19937_64;

struct ChannelConfig {
    double sigma_phi = 20.0;        // Mbps, Rayleigh scale
    double data_size = 307200.0;    // bits per offload
    double server_compute = 0.0;    // seconds
    double phi_min = 0.1;           // Mbps
    void validate() const;
};

struct QueueConfig {
    int C = 4000;
    double rho_load = 0.97;
    double per_task_delay = 0.001;  // seconds per queued task
    void validate() const;
};

struct EnergyConfig {
    double E_local_inference = 113.5;  // mJ
    double P_tx = 1.0;                 // W
    double P_idle = 0.0;               // W
    void validate() const;
};

struct ChannelSample {
    double throughput = 0.0;   // Mbps
    double queue_delay = 0.0;  // seconds
};

struct Response {
    double latency = 0.0;  // seconds, L_comm
    double tx_time = 0.0;  // seconds, L_Tx
    ChannelSample sample{};
};

double rayleigh_from_uniform(double u, double sigma_phi);
double sample_throughput(Rng& rng, const ChannelConfig& ch);

std::vector<double> queue_pmf(const QueueConfig& q);
double expected_queue_delay(const QueueConfig& q);

// inverse-CDF sampler over the queue occupancy pmf
class QueueSampler {
public:
    QueueSampler() = default;
    explicit QueueSampler(const QueueConfig& q);
    int sample_position(Rng& rng) const;
    double sample_delay(Rng& rng) const;
    const QueueConfig& config() const { return _q; }

private:
    QueueConfig _q{};
    std::vector<double> _cdf;
};

double sample_queue_delay(Rng& rng, const QueueConfig& q);

double transmit_time(double throughput, const ChannelConfig& ch);
Response realize_response_time(Rng& rng, const ChannelConfig& ch, const QueueSampler& queue);
Response realize_response_time(Rng& rng, const ChannelConfig& ch, const QueueConfig& q);

// seconds -> whole samples, at least one
int latency_to_samples(double latency, double T);

class ResponseHistory {
public:
    explicit ResponseHistory(std::size_t k = 5) : _k(k == 0 ? 1 : k) {}
    void push(const ChannelSample& s);
    std::size_t size() const { return _items.size(); }
    std::size_t capacity() const { return _k; }
    bool empty() const { return _items.empty(); }
    double mean_throughput() const;
    double mean_queue_delay() const;
    const std::vector<ChannelSample>& items() const { return _items; }

private:
    std::size_t _k;
    std::vector<ChannelSample> _items;  // oldest first
};

double estimate_latency(const ResponseHistory& hist, const ChannelConfig& ch, const QueueConfig& q);
int estimate_delta_hat(const ResponseHistory& hist, const ChannelConfig& ch, const QueueConfig& q, double T);
// same, with the empty-history queue prior supplied by the caller
double estimate_latency(const ResponseHistory& hist, const ChannelConfig& ch, double prior_queue_delay);
int estimate_delta_hat(const ResponseHistory& hist, const ChannelConfig& ch, double prior_queue_delay, double T);

enum class EnergyMode { LocalInference, Transmit, Idle };

double window_energy(EnergyMode mode, const EnergyConfig& e, double T, double t_tx = 0.0);

}  // namespace energyshield
