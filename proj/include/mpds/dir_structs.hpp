#pragma once

#include <deque>
#include <string>

#include "mpds/directory.hpp"
#include "mpds/sim.hpp"

namespace mpds {

// Directory-based structures: a synchronizer process owns the key counters
// and hands keys out; elements live in the directory under those keys.

inline std::string enc(Value v) { return std::to_string(v); }
inline Value dec(const std::string& s) { return std::stoll(s); }

// --- stack ---------------------------------------------------------------------

struct StackSyncState {
  std::int64_t top_key = -1;
};

// PUSH increments then sends; POP sends the current key, then decrements
// only when it was not -1. Combined requests move the counter by the batch
// size and reply with the pre-batch value.
inline Proc stack_synchronizer(Ctx& ctx, StackSyncState& st) {
  for (;;) {
    Message m = co_await ctx.recv(
        Filter::ops({OP_PUSH, OP_POP, OP_COMBINE_PUSH, OP_COMBINE_POP}));
    Message r;
    r.op = OP_ACK;
    switch (m.op) {
      case OP_PUSH:
        r.key = ++st.top_key;
        break;
      case OP_POP:
        r.key = st.top_key;
        if (st.top_key != -1) --st.top_key;
        break;
      case OP_COMBINE_PUSH:
        r.key = st.top_key;  // keys granted: key+1 .. key+f
        st.top_key += m.val;
        break;
      case OP_COMBINE_POP:
        r.key = st.top_key;  // keys granted: key, key-1, ... floor -1
        st.top_key = std::max<std::int64_t>(-1, st.top_key - m.val);
        break;
    }
    co_await ctx.send(m.src, std::move(r));
  }
}

inline Task<bool> dstack_push(Ctx& ctx, CoreId sync, const DirectoryConfig& dir,
                              Value v) {
  Message m;
  m.op = OP_PUSH;
  m.cid = ctx.self;
  co_await ctx.send(sync, std::move(m));
  Message r = co_await ctx.recv(Filter::from(sync));
  co_return co_await dir_insert(ctx, dir, r.key, enc(v));
}

inline Task<Value> dstack_pop(Ctx& ctx, CoreId sync, const DirectoryConfig& dir) {
  Message m;
  m.op = OP_POP;
  m.cid = ctx.self;
  co_await ctx.send(sync, std::move(m));
  Message r = co_await ctx.recv(Filter::from(sync));
  if (r.key == -1) co_return kEmpty;
  for (;;) {
    auto got = co_await dir_delete(ctx, dir, r.key);
    if (got) co_return dec(*got);
  }
}

// --- queue ---------------------------------------------------------------------

struct QueueSyncState {
  std::int64_t head_key = 0;
  std::int64_t tail_key = 0;
};

inline Proc queue_synchronizer(Ctx& ctx, QueueSyncState& st) {
  for (;;) {
    Message m =
        co_await ctx.recv(Filter::ops({OP_ENQ, OP_DEQ, OP_COMBINE_ENQDEQ}));
    Message r;
    r.op = OP_ACK;
    switch (m.op) {
      case OP_ENQ:
        r.key = ++st.tail_key;
        break;
      case OP_DEQ:
        if (st.head_key < st.tail_key) {
          r.key = ++st.head_key;
        } else {
          r.op = OP_NACK;
        }
        break;
      case OP_COMBINE_ENQDEQ: {
        // val = enqueue count, val2 = dequeue count; enqueues take effect
        // first, dequeues are granted up to the available elements
        r.val = st.tail_key;
        st.tail_key += m.val;
        r.val2 = st.head_key;
        std::int64_t granted =
            std::min<std::int64_t>(m.val2, st.tail_key - st.head_key);
        st.head_key += granted;
        r.key = granted;
        break;
      }
    }
    co_await ctx.send(m.src, std::move(r));
  }
}

inline Task<bool> dqueue_enqueue(Ctx& ctx, CoreId sync,
                                 const DirectoryConfig& dir, Value v,
                                 Step delay = 0, bool delayed = false) {
  Message m;
  m.op = OP_ENQ;
  m.cid = ctx.self;
  co_await ctx.send(sync, std::move(m));
  Message r = co_await ctx.recv(Filter::from(sync));
  co_return co_await dir_insert(ctx, dir, r.key, enc(v), delayed ? delay : 0);
}

inline Task<Value> dqueue_dequeue(Ctx& ctx, CoreId sync,
                                  const DirectoryConfig& dir) {
  Message m;
  m.op = OP_DEQ;
  m.cid = ctx.self;
  co_await ctx.send(sync, std::move(m));
  Message r = co_await ctx.recv(Filter::from(sync));
  if (r.op == OP_NACK) co_return kEmpty;
  std::string data = co_await block_dir_delete(ctx, dir, r.key);
  co_return dec(data);
}

// --- deque ---------------------------------------------------------------------

struct DequeSyncState {
  std::int64_t head_key = 0;
  std::int64_t tail_key = 0;
};

// Dequeues are executed by the synchronizer itself: it retries DirDelete on
// the chosen key until the lazy insert lands, then replies with the data.
inline Proc deque_synchronizer(Ctx& ctx, DequeSyncState& st,
                               const DirectoryConfig& dir) {
  for (;;) {
    Message m = co_await ctx.recv(
        Filter::ops({OP_ENQ_T, OP_DEQ_T, OP_ENQ_H, OP_DEQ_H}));
    Message r;
    r.op = OP_ACK;
    switch (m.op) {
      case OP_ENQ_T:
        r.key = ++st.tail_key;
        co_await ctx.send(m.src, std::move(r));
        break;
      case OP_ENQ_H:
        r.key = st.head_key--;
        co_await ctx.send(m.src, std::move(r));
        break;
      case OP_DEQ_T: {
        if (st.tail_key == st.head_key) {
          r.op = OP_NACK;
          co_await ctx.send(m.src, std::move(r));
          break;
        }
        std::optional<std::string> got;
        do {
          got = co_await dir_delete(ctx, dir, st.tail_key);
        } while (!got);
        --st.tail_key;
        r.data = *got;
        co_await ctx.send(m.src, std::move(r));
        break;
      }
      case OP_DEQ_H: {
        if (st.tail_key == st.head_key) {
          r.op = OP_NACK;
          co_await ctx.send(m.src, std::move(r));
          break;
        }
        ++st.head_key;
        std::optional<std::string> got;
        do {
          got = co_await dir_delete(ctx, dir, st.head_key);
        } while (!got);
        r.data = *got;
        co_await ctx.send(m.src, std::move(r));
        break;
      }
    }
  }
}

inline Task<bool> ddeque_enqueue(Ctx& ctx, CoreId sync,
                                 const DirectoryConfig& dir, bool tail,
                                 Value v) {
  Message m;
  m.op = tail ? OP_ENQ_T : OP_ENQ_H;
  m.cid = ctx.self;
  co_await ctx.send(sync, std::move(m));
  Message r = co_await ctx.recv(Filter::from(sync));
  co_return co_await dir_insert(ctx, dir, r.key, enc(v));
}

inline Task<Value> ddeque_dequeue(Ctx& ctx, CoreId sync,
                                  const DirectoryConfig& dir, bool tail) {
  (void)dir;  // the synchronizer touches the directory on our behalf
  Message m;
  m.op = tail ? OP_DEQ_T : OP_DEQ_H;
  m.cid = ctx.self;
  co_await ctx.send(sync, std::move(m));
  Message r = co_await ctx.recv(Filter::from_ops(sync, {OP_ACK, OP_NACK}));
  if (r.op == OP_NACK) co_return kEmpty;
  co_return dec(r.data);
}

// --- synchronous queue -----------------------------------------------------------

struct SyncQueueState {
  std::int64_t head_key = 0;
  std::int64_t tail_key = 0;
  struct Pending {
    CoreId enqueuer;
    std::int64_t key;
  };
  std::deque<Pending> pending;  // capacity bounded by the client count
};

// Enqueue replies are deferred until a dequeue consumes the matching key, so
// the two operations' intervals overlap. Dequeues are granted even when
// head == tail.
inline Proc syncqueue_synchronizer(Ctx& ctx, SyncQueueState& st) {
  for (;;) {
    Message m = co_await ctx.recv(Filter::ops({OP_SQ_ENQ, OP_SQ_DEQ}));
    if (m.op == OP_SQ_ENQ) {
      st.pending.push_back({m.src, ++st.tail_key});
    } else {
      Message r;
      r.op = OP_ACK;
      r.key = ++st.head_key;
      co_await ctx.send(m.src, std::move(r));
    }
    while (!st.pending.empty() && st.pending.front().key <= st.head_key) {
      Message rel;
      rel.op = OP_ACK;
      rel.key = st.pending.front().key;
      CoreId to = st.pending.front().enqueuer;
      st.pending.pop_front();
      co_await ctx.send(to, std::move(rel));
    }
  }
}

inline Task<bool> syncqueue_enqueue(Ctx& ctx, CoreId sync,
                                    const DirectoryConfig& dir, Value v) {
  Message m;
  m.op = OP_SQ_ENQ;
  m.cid = ctx.self;
  co_await ctx.send(sync, std::move(m));
  Message r = co_await ctx.recv(Filter::from(sync));  // deferred until matched
  co_return co_await dir_insert(ctx, dir, r.key, enc(v));
}

inline Task<Value> syncqueue_dequeue(Ctx& ctx, CoreId sync,
                                     const DirectoryConfig& dir) {
  Message m;
  m.op = OP_SQ_DEQ;
  m.cid = ctx.self;
  co_await ctx.send(sync, std::move(m));
  Message r = co_await ctx.recv(Filter::from(sync));
  std::string data = co_await block_dir_delete(ctx, dir, r.key);
  co_return dec(data);
}

// --- delay queue -----------------------------------------------------------------

// A plain queue whose directory entries carry a not-before step; the home
// server withholds removal until the embargo passes.
inline Task<bool> delayqueue_enqueue(Ctx& ctx, CoreId sync,
                                     const DirectoryConfig& dir, Value v,
                                     Step delay_steps) {
  return dqueue_enqueue(ctx, sync, dir, v, delay_steps, true);
}

inline Task<Value> delayqueue_dequeue(Ctx& ctx, CoreId sync,
                                      const DirectoryConfig& dir) {
  return dqueue_dequeue(ctx, sync, dir);
}

}  // namespace mpds
