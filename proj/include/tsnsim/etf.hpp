#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>

#include "tsnsim/clock.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/frame.hpp"
#include "tsnsim/jitter.hpp"

namespace tsnsim {

inline constexpr Duration kEtfDefaultDeltaOffload = 0;
inline constexpr Duration kEtfDefaultDeltaSoftware = 50 * kNsPerUs;

struct EtfConfig
{
    bool offload = false;
    Duration delta_ns = kEtfDefaultDeltaSoftware;
    JitterDist hw_precision = JitterDist::constant(0); // offload wire-out error
};

enum class EtfEnqueueResult
{
    Queued,
    DroppedPastTxtime,
};

/// Frames ordered by (txtime, frame id).
class EtfQueue
{
  public:
    explicit EtfQueue(Duration delta_ns = 0) : delta_ns_(delta_ns) {}

    /// Accepts iff txtime >= now + delta. Throws MissingTxtime.
    EtfEnqueueResult enqueue(Frame frame, SimTime now);

    bool empty() const noexcept { return q_.empty(); }
    std::size_t size() const noexcept { return q_.size(); }
    const Frame &top() const { return q_.begin()->second; }
    Frame pop();

    Duration delta() const noexcept { return delta_ns_; }
    std::uint64_t dropped_past_txtime() const noexcept { return dropped_; }

  private:
    Duration delta_ns_;
    std::map<std::pair<SimTime, std::uint64_t>, Frame> q_;
    std::uint64_t dropped_ = 0;
};

/// Drives an EtfQueue on the engine. Offload: the head leaves when the
/// clock (the port's PHC) reads txtime, shifted by a per-frame hardware
/// precision sample drawn at enqueue. Software: the head is handed on when
/// the clock (system clock) reads txtime - delta.
class EtfScheduler
{
  public:
    using Release = std::function<void(Frame)>;

    EtfScheduler(EventEngine &engine, EtfConfig cfg, const NodeClock &clock, Rng precision_rng,
                 Release on_release);
    EtfScheduler(const EtfScheduler &) = delete;
    EtfScheduler &operator=(const EtfScheduler &) = delete;

    EtfEnqueueResult enqueue(Frame frame);

    const EtfQueue &queue() const noexcept { return queue_; }
    const EtfConfig &config() const noexcept { return cfg_; }

  private:
    SimTime release_time(const Frame &f) const;
    void arm();
    void fire();

    EventEngine &engine_;
    EtfConfig cfg_;
    const NodeClock &clock_;
    Rng rng_;
    Release on_release_;
    EtfQueue queue_;
    std::unordered_map<std::uint64_t, Duration> precision_;
    std::optional<EventEngine::Handle> armed_;
    SimTime armed_at_ = 0;
};

} // namespace tsnsim
