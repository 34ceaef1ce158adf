#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include "gwct/pipeline.hpp"

namespace gwct {

namespace {

FrameResult run_frame(std::size_t index, const std::function<Frame(std::size_t)>& load,
                      const StyleModel& model, const Codec& codec, const BlendSpec& spec) {
  FrameResult r;
  r.index = index;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Frame frame = load(index);
    StylizeResult s = stylize_image(frame.image, frame.mask, model, codec, spec);
    r.image = std::move(s.image);
    r.report = std::move(s.report);
  } catch (const Error& e) {
    r.error_code = e.code();
    r.error = e.what();
  } catch (const std::exception& e) {
    r.error_code = ErrorCode::InvalidArgument;
    r.error = e.what();
  }
  r.milliseconds =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

SequenceSummary stylize_sequence(std::size_t count,
                                 const std::function<Frame(std::size_t)>& load,
                                 const std::function<void(FrameResult&&)>& sink,
                                 const StyleModel& model, const Codec& codec,
                                 const BlendSpec& spec, const SequenceOptions& options) {
  spec.validate(model);
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(count, static_cast<std::size_t>(std::max(options.workers, 1))));
  const std::size_t window = options.max_in_flight > 0 ? options.max_in_flight : 2 * workers;

  SequenceSummary summary;
  summary.frames = count;

  std::mutex mu;
  std::condition_variable cv;
  std::size_t next = 0;       // next frame to start
  std::size_t delivered = 0;  // frames handed to the sink
  bool delivering = false;
  std::map<std::size_t, FrameResult> ready;

  auto worker = [&] {
    for (;;) {
      std::size_t index = 0;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return next >= count || next < delivered + window; });
        if (next >= count) return;
        index = next++;
      }
      FrameResult result = run_frame(index, load, model, codec, spec);
      std::unique_lock lock(mu);
      ready.emplace(index, std::move(result));
      // Only one thread drains at a time; the sink sees frames in order.
      if (delivering) continue;
      delivering = true;
      while (!ready.empty() && ready.begin()->first == delivered) {
        FrameResult out = std::move(ready.begin()->second);
        ready.erase(ready.begin());
        if (!out.image) ++summary.failed;
        lock.unlock();
        sink(std::move(out));
        lock.lock();
        ++delivered;
        cv.notify_all();
      }
      delivering = false;
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  return summary;
}

std::vector<FrameResult> stylize_sequence(std::span<const Frame> frames, const StyleModel& model,
                                          const Codec& codec, const BlendSpec& spec,
                                          const SequenceOptions& options) {
  std::vector<FrameResult> out;
  out.reserve(frames.size());
  stylize_sequence(
      frames.size(), [&](std::size_t i) { return frames[i]; },
      [&](FrameResult&& r) { out.push_back(std::move(r)); }, model, codec, spec, options);
  return out;
}

}  // namespace gwct
