#pragma once

#include <algorithm>
#include <cassert>
#include <coroutine>
#include <cstdio>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mpds/core.hpp"

namespace mpds {

class Sim;
struct Ctx;

// Top-level coroutine of a simulated process. Starts suspended; the scheduler
// drives it one slice at a time (resume .. next co_await).
class Proc {
 public:
  struct promise_type {
    Proc get_return_object() {
      return Proc{std::coroutine_handle<promise_type>::from_promise(*this)};
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_always final_suspend() noexcept { return {}; }
    void return_void() {}
    void unhandled_exception() { error = std::current_exception(); }
    std::exception_ptr error;
  };

  explicit Proc(std::coroutine_handle<promise_type> h) : handle(h) {}
  std::coroutine_handle<promise_type> handle;
};

// Awaitable subroutine. `co_await some_task()` runs the callee inside the
// caller's scheduler slices; suspension points inside the callee suspend the
// whole process.
template <class T>
class [[nodiscard]] Task {
 public:
  struct promise_type {
    std::coroutine_handle<> cont;
    std::optional<T> value;
    std::exception_ptr err;

    Task get_return_object() {
      return Task{std::coroutine_handle<promise_type>::from_promise(*this)};
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    struct Final {
      bool await_ready() noexcept { return false; }
      std::coroutine_handle<> await_suspend(
          std::coroutine_handle<promise_type> h) noexcept {
        auto c = h.promise().cont;
        return c ? c : std::noop_coroutine();
      }
      void await_resume() noexcept {}
    };
    Final final_suspend() noexcept { return {}; }
    void return_value(T v) { value.emplace(std::move(v)); }
    void unhandled_exception() { err = std::current_exception(); }
  };

  using handle_t = std::coroutine_handle<promise_type>;

  explicit Task(handle_t h) : h_(h) {}
  Task(Task&& o) noexcept : h_(std::exchange(o.h_, {})) {}
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;
  ~Task() {
    if (h_) h_.destroy();
  }

  bool await_ready() const noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) {
    h_.promise().cont = parent;
    return h_;
  }
  T await_resume() {
    if (h_.promise().err) std::rethrow_exception(h_.promise().err);
    return std::move(*h_.promise().value);
  }

 private:
  handle_t h_;
};

template <>
class [[nodiscard]] Task<void> {
 public:
  struct promise_type {
    std::coroutine_handle<> cont;
    std::exception_ptr err;

    Task get_return_object() {
      return Task{std::coroutine_handle<promise_type>::from_promise(*this)};
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    struct Final {
      bool await_ready() noexcept { return false; }
      std::coroutine_handle<> await_suspend(
          std::coroutine_handle<promise_type> h) noexcept {
        auto c = h.promise().cont;
        return c ? c : std::noop_coroutine();
      }
      void await_resume() noexcept {}
    };
    Final final_suspend() noexcept { return {}; }
    void return_void() {}
    void unhandled_exception() { err = std::current_exception(); }
  };

  using handle_t = std::coroutine_handle<promise_type>;

  explicit Task(handle_t h) : h_(h) {}
  Task(Task&& o) noexcept : h_(std::exchange(o.h_, {})) {}
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;
  ~Task() {
    if (h_) h_.destroy();
  }

  bool await_ready() const noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) {
    h_.promise().cont = parent;
    return h_;
  }
  void await_resume() {
    if (h_.promise().err) std::rethrow_exception(h_.promise().err);
  }

 private:
  handle_t h_;
};

enum class EvKind {
  Spawn,
  Send,
  Deliver,
  Recv,
  Cell,
  DmaStart,
  DmaStep,
  DmaDone,
  Note,
  Exit,
};

inline const char* ev_name(EvKind k) {
  switch (k) {
    case EvKind::Spawn: return "spawn";
    case EvKind::Send: return "send";
    case EvKind::Deliver: return "deliver";
    case EvKind::Recv: return "recv";
    case EvKind::Cell: return "cell";
    case EvKind::DmaStart: return "dma_start";
    case EvKind::DmaStep: return "dma_step";
    case EvKind::DmaDone: return "dma_done";
    case EvKind::Note: return "note";
    case EvKind::Exit: return "exit";
  }
  return "?";
}

struct Event {
  Step step = 0;
  EvKind kind = EvKind::Note;
  CoreId src = -1;
  CoreId dst = -1;
  int op = OP_NONE;
  std::string detail;
  std::int64_t mseq = -1;  // message identity for send/deliver/recv events
};

// Receive filter: sender (-1 = any) plus an op bitmask (default: all ops).
struct Filter {
  CoreId src = -1;
  std::uint64_t op_mask = ~0ull;

  static Filter any() { return {}; }
  static Filter from(CoreId s) { return {s, ~0ull}; }
  static Filter ops(std::initializer_list<int> list) {
    Filter f;
    f.op_mask = 0;
    for (int o : list) f.op_mask |= 1ull << o;
    return f;
  }
  static Filter from_ops(CoreId s, std::initializer_list<int> list) {
    Filter f = Filter::ops(list);
    f.src = s;
    return f;
  }
  bool matches(const Message& m) const {
    if (src >= 0 && m.src != src) return false;
    return (op_mask >> m.op) & 1ull;
  }
};

struct RunResult {
  bool quiescent = false;  // no step enabled and nothing in flight
  bool truncated = false;  // hit max_steps
  Step steps = 0;
  std::vector<std::string> blocked;  // processes parked in receive at the end
  bool deadlocked() const { return quiescent && !blocked.empty(); }
};

// Deterministic discrete-step simulator of a non-cache-coherent many-core
// machine: per-core FIFO mailboxes, delayed delivery, a non-atomic DMA
// engine, island-local atomic cells, and a fair scheduler. All cross-core
// interaction goes through mailboxes; one logical timeline.
class Sim {
 public:
  explicit Sim(Topology topo, Config cfg = {}) : topo_(topo), cfg_(cfg) {
    mailboxes_.resize(topo_.total());
    box_units_.assign(topo_.total(), 0);
    deliveries_.assign(topo_.total(), 0);
    mailbox_peak_.assign(topo_.total(), 0);
    last_delivery_.assign(static_cast<size_t>(topo_.total()) * topo_.total(),
                          0);
  }

  Sim(const Sim&) = delete;
  Sim& operator=(const Sim&) = delete;
  ~Sim() {
    for (auto& up : procs_)
      if (up->handle) up->handle.destroy();
  }

  const Topology& topology() const { return topo_; }
  const Config& config() const { return cfg_; }
  Step now() const { return now_; }

  using ProcFn = std::function<Proc(Ctx&)>;

  int spawn(CoreId core, std::string name, ProcFn fn) {
    return spawn_impl(core, std::move(name), std::move(fn), false);
  }
  // Daemons (servers, masters) idle in receive forever by design and are
  // excluded from the blocked-process diagnostic.
  int spawn_daemon(CoreId core, std::string name, ProcFn fn) {
    return spawn_impl(core, std::move(name), std::move(fn), true);
  }

  // island-local shared cells (partially cache-coherent mode)
  int alloc_cell(int island, Value init = 0) {
    cells_.push_back({island, init});
    return static_cast<int>(cells_.size()) - 1;
  }
  Value peek_cell(int cell) const { return cells_[cell].value; }

  // flat byte memory, addressable by the DMA engine
  std::int64_t alloc_mem(std::int64_t len) {
    std::int64_t base = static_cast<std::int64_t>(memory_.size());
    memory_.resize(memory_.size() + static_cast<size_t>(len), std::byte{0});
    return base;
  }
  std::byte* mem(std::int64_t addr) { return memory_.data() + addr; }

  RunResult run_until_quiescent(const SchedulerConfig& sched);

  const std::vector<Event>& log() const { return log_; }
  std::int64_t deliveries_to(CoreId core) const { return deliveries_[core]; }
  std::int64_t total_deliveries() const {
    std::int64_t t = 0;
    for (auto d : deliveries_) t += d;
    return t;
  }
  std::int64_t total_sends() const { return sends_; }
  int mailbox_peak(CoreId core) const { return mailbox_peak_[core]; }
  std::int64_t overflow_events() const { return overflows_; }
  std::int64_t dma_transfers() const { return dma_transfers_; }

  void note(CoreId who, const std::string& text) {
    log_.push_back({now_, EvKind::Note, who, -1, OP_NONE, text});
  }

  // Event log as line-oriented CSV: step,kind,src,dst,op,detail
  void write_event_csv(std::FILE* f) const {
    std::fputs("step,kind,src,dst,op,detail\n", f);
    for (const auto& e : log_) {
      std::string detail = e.detail;
      if (e.mseq >= 0) detail += "#" + std::to_string(e.mseq);
      std::fprintf(f, "%lld,%s,%d,%d,%s,%s\n", static_cast<long long>(e.step),
                   ev_name(e.kind), e.src, e.dst, op_name(e.op),
                   detail.c_str());
    }
  }

 private:
  friend struct Ctx;
  friend struct StepAwaiter;
  friend struct SendAwaiter;
  friend struct RecvAwaiter;
  friend struct RecvUntilAwaiter;
  friend struct CellAwaiter;
  friend struct CellWaitAwaiter;
  friend struct DmaAwaiter;

  enum class WaitKind { Ready, Recv, CellWait, Dma, Running };

  struct Process {
    int pid = -1;
    CoreId core = -1;
    std::string name;
    std::unique_ptr<Ctx> ctx;
    std::function<Proc(Ctx&)> fn;  // owns the coroutine lambda's captures
    std::coroutine_handle<Proc::promise_type> handle;  // top-level frame
    std::coroutine_handle<> active;                    // leaf to resume
    bool done = false;
    bool daemon = false;

    WaitKind wait = WaitKind::Ready;
    Filter filter;              // valid when wait == Recv
    bool has_deadline = false;  // recv timeout
    Step deadline = 0;
    int wait_cell = -1;  // valid when wait == CellWait
    Value wait_value = 0;

    std::optional<Message> picked;  // set on resume from recv
    std::mt19937_64 rng;            // per-process stream, schedule-independent
  };

  struct InFlight {
    Step at;
    std::int64_t seq;
    Message msg;
    bool operator>(const InFlight& o) const {
      return std::tie(at, seq) > std::tie(o.at, o.seq);
    }
  };

  struct CellSlot {
    int island;
    Value value;
  };

  struct DmaReq {
    int id;
    int initiator_pid;
    std::int64_t src, dst, len;
    std::int64_t done = 0;
  };

  void post(int pid, Message m) {
    Process& p = *procs_[pid];
    m.src = p.core;
    if (!topo_.valid(m.dst))
      throw std::invalid_argument("send: invalid destination core " +
                                  std::to_string(m.dst));
    Step delay = 1;
    if (mode_ == SchedMode::SeededRandomFair && cfg_.max_delay > 1)
      delay = 1 + static_cast<Step>(
                      sched_rng_() % static_cast<std::uint64_t>(cfg_.max_delay));
    // per-channel FIFO: delivery times never decrease along a channel
    auto& floor =
        last_delivery_[static_cast<size_t>(m.src) * topo_.total() + m.dst];
    Step at = std::max(now_ + delay, floor);
    floor = at;
    log_.push_back({now_, EvKind::Send, m.src, m.dst, m.op,
                    m.batch.empty()
                        ? ""
                        : "units=" + std::to_string(m.size_units()),
                    seq_});
    sends_++;
    m.seq = seq_;
    in_flight_.push({at, seq_++, std::move(m)});
  }

  void deliver_due() {
    while (!in_flight_.empty() && in_flight_.top().at <= now_) {
      Message m = std::move(const_cast<InFlight&>(in_flight_.top()).msg);
      in_flight_.pop();
      log_.push_back({now_, EvKind::Deliver, m.src, m.dst, m.op, "", m.seq});
      deliveries_[m.dst]++;
      box_units_[m.dst] += m.size_units();
      mailbox_peak_[m.dst] = std::max(mailbox_peak_[m.dst], box_units_[m.dst]);
      if (cfg_.mailbox_bound > 0 && box_units_[m.dst] > cfg_.mailbox_bound)
        overflows_++;
      mailboxes_[m.dst].push_back(std::move(m));
    }
  }

  bool recv_ready(const Process& p) const {
    for (const auto& m : mailboxes_[p.core])
      if (p.filter.matches(m)) return true;
    return false;
  }

  bool is_enabled(const Process& p) const {
    if (p.done) return false;
    switch (p.wait) {
      case WaitKind::Ready: return true;
      case WaitKind::Recv:
        return recv_ready(p) || (p.has_deadline && now_ >= p.deadline);
      case WaitKind::CellWait:
        return cells_[p.wait_cell].value == p.wait_value;
      case WaitKind::Dma: return false;  // the engine wakes it
      case WaitKind::Running: return false;
    }
    return false;
  }

  int spawn_impl(CoreId core, std::string name, ProcFn fn, bool daemon);
  bool run_slice(int pid);  // false if the slice was skipped
  void run_engine_slice();

  std::optional<Step> next_wakeup() const {
    std::optional<Step> t;
    if (!in_flight_.empty()) t = in_flight_.top().at;
    for (const auto& up : procs_) {
      const Process& p = *up;
      if (!p.done && p.wait == WaitKind::Recv && p.has_deadline)
        t = t ? std::min(*t, p.deadline) : p.deadline;
    }
    return t;
  }

  Topology topo_;
  Config cfg_;
  SchedMode mode_ = SchedMode::SeededRandomFair;
  Step now_ = 0;
  std::int64_t seq_ = 0;
  std::int64_t sends_ = 0;
  std::int64_t overflows_ = 0;
  std::int64_t dma_transfers_ = 0;
  std::uint64_t base_seed_ = 1;

  std::vector<std::unique_ptr<Process>> procs_;
  std::vector<std::deque<Message>> mailboxes_;
  std::vector<int> box_units_;
  std::priority_queue<InFlight, std::vector<InFlight>, std::greater<InFlight>>
      in_flight_;
  std::vector<CellSlot> cells_;
  std::vector<std::byte> memory_;
  std::deque<DmaReq> dma_queue_;
  int dma_next_id_ = 0;

  std::vector<Event> log_;
  std::vector<std::int64_t> deliveries_;
  std::vector<int> mailbox_peak_;
  std::vector<Step> last_delivery_;

  std::mt19937_64 sched_rng_;
  std::deque<int> round_;  // entity ids; kEngineId stands for the DMA engine
  static constexpr int kEngineId = -2;
};

// Per-process capability handle: everything a simulated process may do.
struct Ctx {
  Sim& sim;
  CoreId self;
  int pid;

  Step now() const { return sim.now(); }
  int island() const { return sim.topology().island_of(self); }

  std::int64_t rand(std::int64_t lo, std::int64_t hi) {
    auto& rng = sim.procs_[pid]->rng;
    return lo + static_cast<std::int64_t>(
                    rng() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  auto send(CoreId dst, Message m);
  auto recv(Filter f = Filter::any());                    // -> Message
  auto recv_until(Step deadline, Filter f = Filter::any());  // -> optional
  auto step();
  Task<void> work(std::int64_t units);

  auto cell_read(int cell);
  auto cell_write(int cell, Value v);
  auto cell_faa(int cell, Value delta);
  auto cell_swap(int cell, Value v);
  auto cell_cas(int cell, Value expected, Value desired);
  auto cell_wait(int cell, Value until_equals);

  auto dma(std::int64_t src, std::int64_t dst, std::int64_t len);

  void note(const std::string& text) { sim.note(self, text); }
};

// --- awaiters ----------------------------------------------------------------

struct StepAwaiter {
  Ctx& ctx;
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) {
    auto& p = *ctx.sim.procs_[ctx.pid];
    p.active = h;
    p.wait = Sim::WaitKind::Ready;
  }
  void await_resume() const noexcept {}
};

struct SendAwaiter {
  Ctx& ctx;
  Message msg;
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) {
    auto& p = *ctx.sim.procs_[ctx.pid];
    p.active = h;
    ctx.sim.post(ctx.pid, std::move(msg));
    p.wait = Sim::WaitKind::Ready;
  }
  void await_resume() const noexcept {}
};

struct RecvAwaiter {
  Ctx& ctx;
  Filter filter;
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) {
    auto& p = *ctx.sim.procs_[ctx.pid];
    p.active = h;
    p.wait = Sim::WaitKind::Recv;
    p.filter = filter;
    p.has_deadline = false;
    p.picked.reset();
  }
  Message await_resume() {
    auto& p = *ctx.sim.procs_[ctx.pid];
    assert(p.picked.has_value());
    return std::move(*p.picked);
  }
};

struct RecvUntilAwaiter {
  Ctx& ctx;
  Filter filter;
  Step deadline;
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) {
    auto& p = *ctx.sim.procs_[ctx.pid];
    p.active = h;
    p.wait = Sim::WaitKind::Recv;
    p.filter = filter;
    p.has_deadline = true;
    p.deadline = deadline;
    p.picked.reset();
  }
  std::optional<Message> await_resume() {
    auto& p = *ctx.sim.procs_[ctx.pid];
    return std::move(p.picked);
  }
};

enum class CellOp { Read, Write, Faa, Swap, Cas };

// The access takes effect when the process is scheduled, as one atomic step.
struct CellAwaiter {
  Ctx& ctx;
  int cell;
  CellOp op;
  Value a = 0, b = 0;

  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) {
    auto& p = *ctx.sim.procs_[ctx.pid];
    p.active = h;
    p.wait = Sim::WaitKind::Ready;
  }
  Value await_resume() {
    auto& sim = ctx.sim;
    auto& c = sim.cells_[cell];
    if (c.island != ctx.island())
      throw std::logic_error("shared cells are island-local");
    Value result = 0;
    const char* what = "";
    switch (op) {
      case CellOp::Read: result = c.value; what = "rd"; break;
      case CellOp::Write: c.value = a; result = a; what = "wr"; break;
      case CellOp::Faa: c.value += a; result = c.value; what = "faa"; break;
      case CellOp::Swap: result = c.value; c.value = a; what = "swp"; break;
      case CellOp::Cas:
        result = c.value;
        if (c.value == a) c.value = b;
        what = "cas";
        break;
    }
    sim.log_.push_back({sim.now_, EvKind::Cell, ctx.self, -1, OP_NONE,
                        std::string(what) + " c" + std::to_string(cell) + "=" +
                            std::to_string(c.value)});
    return result;
  }
};

// Spin-wait on a cell, modeled as blocking until the awaited value appears;
// under the coherence cost model a spinning reader pays only on change.
struct CellWaitAwaiter {
  Ctx& ctx;
  int cell;
  Value target;
  bool await_ready() const {
    return ctx.sim.cells_[cell].value == target;
  }
  void await_suspend(std::coroutine_handle<> h) {
    auto& p = *ctx.sim.procs_[ctx.pid];
    p.active = h;
    p.wait = Sim::WaitKind::CellWait;
    p.wait_cell = cell;
    p.wait_value = target;
  }
  void await_resume() const noexcept {}
};

struct DmaAwaiter {
  Ctx& ctx;
  std::int64_t src, dst, len;
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) {
    auto& sim = ctx.sim;
    auto& p = *sim.procs_[ctx.pid];
    p.active = h;
    int id = sim.dma_next_id_++;
    sim.dma_queue_.push_back({id, ctx.pid, src, dst, len});
    sim.dma_transfers_++;
    sim.log_.push_back({sim.now_, EvKind::DmaStart, ctx.self, -1, OP_NONE,
                        "len=" + std::to_string(len)});
    p.wait = Sim::WaitKind::Dma;
  }
  void await_resume() const noexcept {}
};

inline auto Ctx::send(CoreId dst, Message m) {
  m.dst = dst;
  return SendAwaiter{*this, std::move(m)};
}
inline auto Ctx::recv(Filter f) { return RecvAwaiter{*this, f}; }
inline auto Ctx::recv_until(Step deadline, Filter f) {
  return RecvUntilAwaiter{*this, f, deadline};
}
inline auto Ctx::step() { return StepAwaiter{*this}; }
inline Task<void> Ctx::work(std::int64_t units) {
  for (std::int64_t i = 0; i < units; ++i) co_await step();
}
inline auto Ctx::cell_read(int cell) {
  return CellAwaiter{*this, cell, CellOp::Read};
}
inline auto Ctx::cell_write(int cell, Value v) {
  return CellAwaiter{*this, cell, CellOp::Write, v};
}
inline auto Ctx::cell_faa(int cell, Value delta) {
  return CellAwaiter{*this, cell, CellOp::Faa, delta};
}
inline auto Ctx::cell_swap(int cell, Value v) {
  return CellAwaiter{*this, cell, CellOp::Swap, v};
}
inline auto Ctx::cell_cas(int cell, Value expected, Value desired) {
  return CellAwaiter{*this, cell, CellOp::Cas, expected, desired};
}
inline auto Ctx::cell_wait(int cell, Value until_equals) {
  return CellWaitAwaiter{*this, cell, until_equals};
}
inline auto Ctx::dma(std::int64_t src, std::int64_t dst, std::int64_t len) {
  return DmaAwaiter{*this, src, dst, len};
}

// --- Sim method bodies --------------------------------------------------------

inline int Sim::spawn_impl(CoreId core, std::string name, ProcFn fn,
                           bool daemon) {
  if (!topo_.valid(core))
    throw std::invalid_argument("spawn: invalid core " + std::to_string(core));
  auto up = std::make_unique<Process>();
  Process& p = *up;
  p.pid = static_cast<int>(procs_.size());
  p.core = core;
  p.name = std::move(name);
  p.ctx = std::make_unique<Ctx>(Ctx{*this, core, p.pid});
  p.fn = std::move(fn);
  p.daemon = daemon;
  procs_.push_back(std::move(up));
  Process& stored = *procs_.back();
  Proc coro = stored.fn(*stored.ctx);
  stored.handle = coro.handle;
  stored.active = coro.handle;
  log_.push_back({now_, EvKind::Spawn, core, -1, OP_NONE, stored.name});
  return stored.pid;
}

inline bool Sim::run_slice(int pid) {
  Process& p = *procs_[pid];
  if (p.wait == WaitKind::Recv) {
    auto& box = mailboxes_[p.core];
    bool found = false;
    for (auto it = box.begin(); it != box.end(); ++it) {
      if (p.filter.matches(*it)) {
        box_units_[p.core] -= it->size_units();
        p.picked = std::move(*it);
        box.erase(it);
        log_.push_back({now_, EvKind::Recv, p.picked->src, p.core,
                        p.picked->op, "", p.picked->seq});
        found = true;
        break;
      }
    }
    if (!found && !(p.has_deadline && now_ >= p.deadline)) return false;
  }
  p.wait = WaitKind::Running;
  p.active.resume();
  if (p.handle.done()) {
    p.done = true;
    log_.push_back({now_, EvKind::Exit, p.core, -1, OP_NONE, p.name});
    if (p.handle.promise().error)
      std::rethrow_exception(p.handle.promise().error);
  }
  return true;
}

inline void Sim::run_engine_slice() {
  DmaReq& req = dma_queue_.front();
  std::int64_t burst =
      std::min<std::int64_t>(cfg_.dma_burst, req.len - req.done);
  if (burst > 0) {
    std::copy_n(memory_.begin() + req.src + req.done, burst,
                memory_.begin() + req.dst + req.done);
    req.done += burst;
    log_.push_back({now_, EvKind::DmaStep, -1, -1, OP_NONE,
                    "copied=" + std::to_string(req.done) + "/" +
                        std::to_string(req.len)});
  }
  if (req.done >= req.len) {
    Process& p = *procs_[req.initiator_pid];
    log_.push_back({now_, EvKind::DmaDone, -1, p.core, OP_DMA_DONE, ""});
    p.wait = WaitKind::Ready;
    dma_queue_.pop_front();
  }
}

inline RunResult Sim::run_until_quiescent(const SchedulerConfig& sched) {
  mode_ = sched.mode;
  base_seed_ = sched.seed;
  sched_rng_.seed(sched.seed);
  for (auto& up : procs_)
    up->rng.seed(sched.seed * 0x9e3779b97f4a7c15ull + 0x517cc1b727220a95ull +
                 static_cast<std::uint64_t>(up->pid));
  round_.clear();

  RunResult res;
  Step executed = 0;

  while (executed < sched.max_steps) {
    deliver_due();

    if (round_.empty()) {
      std::vector<int> ready;
      for (auto& up : procs_)
        if (is_enabled(*up)) ready.push_back(up->pid);
      if (!dma_queue_.empty()) ready.push_back(kEngineId);
      if (mode_ == SchedMode::SeededRandomFair) {
        for (size_t i = ready.size(); i > 1; --i)
          std::swap(ready[i - 1], ready[sched_rng_() % i]);
      }
      round_.assign(ready.begin(), ready.end());
      if (round_.empty()) {
        auto t = next_wakeup();
        if (!t) break;  // quiescent
        now_ = std::max(now_ + 1, *t);
        continue;
      }
    }

    int id = round_.front();
    round_.pop_front();
    bool ran;
    if (id == kEngineId) {
      if (dma_queue_.empty()) continue;
      run_engine_slice();
      ran = true;
    } else {
      if (!is_enabled(*procs_[id])) continue;  // stale entry
      ran = run_slice(id);
    }
    if (ran) {
      now_++;
      executed++;
    }
  }

  res.steps = now_;
  res.truncated = executed >= sched.max_steps;
  if (!res.truncated) {
    res.quiescent = true;
    for (auto& up : procs_)
      if (!up->done && !up->daemon && up->wait == WaitKind::Recv &&
          !up->has_deadline)
        res.blocked.push_back(up->name);
  }
  return res;
}

}  // namespace mpds
