#pragma once

#include <deque>
#include <map>
#include <vector>

#include "mpds/sim.hpp"

namespace mpds {

// Manager-based shared-memory primitives: one server process serializes all
// accesses to its cells, plus readers-writers monitors with writer priority
// and a non-queueing try-lock.

enum class RwEv { RReq, WReq, RGrant, WGrant, RRel, WRel, TryOk, TryFail };

struct RwEvent {
  Step step;
  RwEv what;
  CoreId who;
  std::int64_t monitor;
};

struct PrimManagerState {
  std::map<std::int64_t, Value> cells;

  struct Monitor {
    int readers = 0;
    CoreId writer = -1;
    std::deque<CoreId> readers_queue;
    std::deque<CoreId> writers_queue;
  };
  std::map<std::int64_t, Monitor> monitors;
  std::vector<RwEvent> rw_log;
};

inline Proc prim_manager(Ctx& ctx, PrimManagerState& st) {
  auto ack = [&](CoreId to, Value v) -> Task<void> {
    Message r;
    r.op = OP_ACK;
    r.val = v;
    co_await ctx.send(to, std::move(r));
  };

  for (;;) {
    Message m = co_await ctx.recv(Filter::ops(
        {OP_PRIM_READ, OP_PRIM_WRITE, OP_PRIM_FAA, OP_PRIM_SWAP, OP_PRIM_CAS,
         OP_RW_RLOCK, OP_RW_RUNLOCK, OP_RW_WLOCK, OP_RW_WUNLOCK,
         OP_RW_TRYLOCK}));
    switch (m.op) {
      case OP_PRIM_READ:
        co_await ack(m.src, st.cells[m.key]);
        break;
      case OP_PRIM_WRITE:
        st.cells[m.key] = m.val;
        co_await ack(m.src, m.val);
        break;
      case OP_PRIM_FAA: {
        Value& c = st.cells[m.key];
        c += m.val;
        co_await ack(m.src, c);  // returns the new value
        break;
      }
      case OP_PRIM_SWAP: {
        Value& c = st.cells[m.key];
        Value old = c;
        c = m.val;
        co_await ack(m.src, old);
        break;
      }
      case OP_PRIM_CAS: {
        Value& c = st.cells[m.key];
        Value old = c;
        if (c == m.val) c = m.val2;
        co_await ack(m.src, old);  // caller compares to infer success
        break;
      }
      case OP_RW_RLOCK: {
        auto& mon = st.monitors[m.key];
        st.rw_log.push_back({ctx.now(), RwEv::RReq, m.src, m.key});
        if (mon.writer == -1 && mon.writers_queue.empty()) {
          mon.readers++;
          st.rw_log.push_back({ctx.now(), RwEv::RGrant, m.src, m.key});
          co_await ack(m.src, 1);
        } else {
          // a writer is active or waiting: readers queue up behind it
          mon.readers_queue.push_back(m.src);
        }
        break;
      }
      case OP_RW_RUNLOCK: {
        auto& mon = st.monitors[m.key];
        st.rw_log.push_back({ctx.now(), RwEv::RRel, m.src, m.key});
        mon.readers--;
        co_await ack(m.src, 1);
        if (mon.readers == 0 && !mon.writers_queue.empty()) {
          mon.writer = mon.writers_queue.front();
          mon.writers_queue.pop_front();
          st.rw_log.push_back({ctx.now(), RwEv::WGrant, mon.writer, m.key});
          co_await ack(mon.writer, 1);
        }
        break;
      }
      case OP_RW_WLOCK: {
        auto& mon = st.monitors[m.key];
        st.rw_log.push_back({ctx.now(), RwEv::WReq, m.src, m.key});
        if (mon.writer == -1 && mon.readers == 0) {
          mon.writer = m.src;
          st.rw_log.push_back({ctx.now(), RwEv::WGrant, m.src, m.key});
          co_await ack(m.src, 1);
        } else {
          mon.writers_queue.push_back(m.src);
        }
        break;
      }
      case OP_RW_WUNLOCK: {
        auto& mon = st.monitors[m.key];
        st.rw_log.push_back({ctx.now(), RwEv::WRel, m.src, m.key});
        mon.writer = -1;
        co_await ack(m.src, 1);
        if (!mon.writers_queue.empty()) {
          mon.writer = mon.writers_queue.front();
          mon.writers_queue.pop_front();
          st.rw_log.push_back({ctx.now(), RwEv::WGrant, mon.writer, m.key});
          co_await ack(mon.writer, 1);
        } else {
          while (!mon.readers_queue.empty()) {
            CoreId r = mon.readers_queue.front();
            mon.readers_queue.pop_front();
            mon.readers++;
            st.rw_log.push_back({ctx.now(), RwEv::RGrant, r, m.key});
            co_await ack(r, 1);
          }
        }
        break;
      }
      case OP_RW_TRYLOCK: {
        auto& mon = st.monitors[m.key];
        bool free = mon.writer == -1 && mon.readers == 0;
        if (free) {
          mon.writer = m.src;
          st.rw_log.push_back({ctx.now(), RwEv::TryOk, m.src, m.key});
          st.rw_log.push_back({ctx.now(), RwEv::WGrant, m.src, m.key});
          co_await ack(m.src, 1);
        } else {
          st.rw_log.push_back({ctx.now(), RwEv::TryFail, m.src, m.key});
          Message r;
          r.op = OP_NACK;
          co_await ctx.send(m.src, std::move(r));
        }
        break;
      }
    }
  }
}

// --- client-side operations ------------------------------------------------------

namespace prim_detail {

inline Task<Message> rpc(Ctx& ctx, CoreId mgr, int op, std::int64_t key,
                         Value a = 0, Value b = 0) {
  Message m;
  m.op = op;
  m.key = key;
  m.val = a;
  m.val2 = b;
  m.cid = ctx.self;
  co_await ctx.send(mgr, std::move(m));
  co_return co_await ctx.recv(Filter::from_ops(mgr, {OP_ACK, OP_NACK}));
}

}  // namespace prim_detail

inline Task<Value> atomic_read(Ctx& ctx, CoreId mgr, std::int64_t addr) {
  co_return (co_await prim_detail::rpc(ctx, mgr, OP_PRIM_READ, addr)).val;
}
inline Task<void> atomic_write(Ctx& ctx, CoreId mgr, std::int64_t addr,
                               Value v) {
  co_await prim_detail::rpc(ctx, mgr, OP_PRIM_WRITE, addr, v);
}
inline Task<Value> atomic_faa(Ctx& ctx, CoreId mgr, std::int64_t addr,
                              Value delta) {
  co_return (co_await prim_detail::rpc(ctx, mgr, OP_PRIM_FAA, addr, delta)).val;
}
inline Task<Value> atomic_swap(Ctx& ctx, CoreId mgr, std::int64_t addr,
                               Value v) {
  co_return (co_await prim_detail::rpc(ctx, mgr, OP_PRIM_SWAP, addr, v)).val;
}
// Returns the pre-operation value; the caller infers success.
inline Task<Value> atomic_cas(Ctx& ctx, CoreId mgr, std::int64_t addr,
                              Value expected, Value desired) {
  co_return (
      co_await prim_detail::rpc(ctx, mgr, OP_PRIM_CAS, addr, expected, desired))
      .val;
}

inline Task<void> rw_read_lock(Ctx& ctx, CoreId mgr, std::int64_t mon) {
  co_await prim_detail::rpc(ctx, mgr, OP_RW_RLOCK, mon);
}
inline Task<void> rw_read_unlock(Ctx& ctx, CoreId mgr, std::int64_t mon) {
  co_await prim_detail::rpc(ctx, mgr, OP_RW_RUNLOCK, mon);
}
inline Task<void> rw_write_lock(Ctx& ctx, CoreId mgr, std::int64_t mon) {
  co_await prim_detail::rpc(ctx, mgr, OP_RW_WLOCK, mon);
}
inline Task<void> rw_write_unlock(Ctx& ctx, CoreId mgr, std::int64_t mon) {
  co_await prim_detail::rpc(ctx, mgr, OP_RW_WUNLOCK, mon);
}
inline Task<bool> rw_try_lock(Ctx& ctx, CoreId mgr, std::int64_t mon) {
  co_return (co_await prim_detail::rpc(ctx, mgr, OP_RW_TRYLOCK, mon)).op ==
      OP_ACK;
}

// Swap semantics composed from monitor + plain read/write: the manager
// composition pattern (two request/reply pairs to the monitor, plus the two
// data accesses).
inline Task<Value> get_and_set(Ctx& ctx, CoreId mgr, std::int64_t addr,
                               Value v) {
  co_await rw_write_lock(ctx, mgr, addr);
  Value old = co_await atomic_read(ctx, mgr, addr);
  co_await atomic_write(ctx, mgr, addr, v);
  co_await rw_write_unlock(ctx, mgr, addr);
  co_return old;
}

struct LazyCasResult {
  bool attempted = false;  // false: monitor was busy, gave up lazily
  Value old = 0;
};

// compareAndSet variant that lazily fails instead of queueing when another
// writer owns the monitor.
inline Task<LazyCasResult> lazy_cas(Ctx& ctx, CoreId mgr, std::int64_t addr,
                                    Value expected, Value desired) {
  if (!co_await rw_try_lock(ctx, mgr, addr)) co_return LazyCasResult{};
  Value old = co_await atomic_read(ctx, mgr, addr);
  if (old == expected) co_await atomic_write(ctx, mgr, addr, desired);
  co_await rw_write_unlock(ctx, mgr, addr);
  co_return LazyCasResult{true, old};
}

// --- audits over the manager's event trail ---------------------------------------

// No interval where a writer holds the monitor together with a reader or
// another writer.
inline bool rw_safety_ok(const std::vector<RwEvent>& log) {
  std::map<std::int64_t, int> readers;
  std::map<std::int64_t, int> writers;
  for (const auto& e : log) {
    switch (e.what) {
      case RwEv::RGrant:
        if (writers[e.monitor] > 0) return false;
        readers[e.monitor]++;
        break;
      case RwEv::RRel: readers[e.monitor]--; break;
      case RwEv::WGrant:
        if (writers[e.monitor] > 0 || readers[e.monitor] > 0) return false;
        writers[e.monitor]++;
        break;
      case RwEv::WRel: writers[e.monitor]--; break;
      default: break;
    }
  }
  return true;
}

// While a writer request is pending, no reader that arrived after it may be
// granted before that writer.
inline bool rw_writer_priority_ok(const std::vector<RwEvent>& log) {
  struct Pend {
    CoreId who;
    size_t at;
  };
  std::map<std::int64_t, std::vector<Pend>> pending;
  std::map<std::pair<std::int64_t, CoreId>, size_t> reader_arrival;
  for (size_t i = 0; i < log.size(); ++i) {
    const auto& e = log[i];
    switch (e.what) {
      case RwEv::WReq: pending[e.monitor].push_back({e.who, i}); break;
      case RwEv::WGrant: {
        auto& v = pending[e.monitor];
        for (auto it = v.begin(); it != v.end(); ++it)
          if (it->who == e.who) {
            v.erase(it);
            break;
          }
        break;
      }
      case RwEv::RReq:
        reader_arrival[{e.monitor, e.who}] = i;
        break;
      case RwEv::RGrant: {
        size_t arrived = reader_arrival[{e.monitor, e.who}];
        for (const auto& p : pending[e.monitor])
          if (p.at < arrived) return false;
        break;
      }
      default: break;
    }
  }
  return true;
}

}  // namespace mpds
