#include "tsnsim/etf.hpp"

#include <algorithm>

#include "tsnsim/errors.hpp"

namespace tsnsim {

EtfEnqueueResult EtfQueue::enqueue(Frame frame, SimTime now)
{
    if (!frame.txtime)
        throw MissingTxtime("frame " + std::to_string(frame.id) + " has no txtime");
    const auto earliest = static_cast<Int128>(now) + delta_ns_;
    if (static_cast<Int128>(*frame.txtime) < earliest) {
        ++dropped_;
        return EtfEnqueueResult::DroppedPastTxtime;
    }
    const auto key = std::make_pair(*frame.txtime, frame.id);
    q_.emplace(key, std::move(frame));
    return EtfEnqueueResult::Queued;
}

Frame EtfQueue::pop()
{
    auto node = q_.extract(q_.begin());
    return std::move(node.mapped());
}

EtfScheduler::EtfScheduler(EventEngine &engine, EtfConfig cfg, const NodeClock &clock, Rng precision_rng,
                           Release on_release)
    : engine_(engine), cfg_(std::move(cfg)), clock_(clock), rng_(precision_rng),
      on_release_(std::move(on_release)), queue_(cfg_.delta_ns)
{
}

EtfEnqueueResult EtfScheduler::enqueue(Frame frame)
{
    const std::uint64_t id = frame.id;
    const auto verdict = queue_.enqueue(std::move(frame), clock_.read(engine_.now()));
    if (verdict == EtfEnqueueResult::Queued) {
        if (cfg_.offload)
            precision_[id] = cfg_.hw_precision.sample(rng_);
        arm();
    }
    return verdict;
}

SimTime EtfScheduler::release_time(const Frame &f) const
{
    const SimTime txtime = *f.txtime;
    Int128 t;
    if (cfg_.offload) {
        t = static_cast<Int128>(clock_.true_time_for(txtime));
        const auto it = precision_.find(f.id);
        if (it != precision_.end())
            t += it->second;
    } else {
        const auto reading = static_cast<Int128>(txtime) - cfg_.delta_ns;
        t = clock_.true_time_for(static_cast<SimTime>(std::max<Int128>(reading, 0)));
    }
    return static_cast<SimTime>(std::max<Int128>(t, engine_.now()));
}

void EtfScheduler::arm()
{
    if (queue_.empty()) {
        if (armed_)
            engine_.cancel(*armed_);
        armed_.reset();
        return;
    }
    const SimTime at = release_time(queue_.top());
    if (armed_ && armed_at_ == at)
        return;
    if (armed_)
        engine_.cancel(*armed_);
    armed_at_ = at;
    armed_ = engine_.schedule(at, [this] { fire(); });
}

void EtfScheduler::fire()
{
    armed_.reset();
    while (!queue_.empty() && release_time(queue_.top()) <= engine_.now()) {
        Frame f = queue_.pop();
        precision_.erase(f.id);
        on_release_(std::move(f));
    }
    arm();
}

} // namespace tsnsim
