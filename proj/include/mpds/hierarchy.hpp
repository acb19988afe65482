#pragma once

#include <deque>
#include <map>
#include <vector>

#include "mpds/sim.hpp"

namespace mpds {

// --- centralized structure server -------------------------------------------------

// The whole stack/queue/deque lives on one core; one request envelope per
// operation, or a packed batch from an island master. Sub-envelope layout is
// identical to the flat protocol, so the handler does not care which path a
// request arrived on.
struct CentralState {
  std::deque<Value> items;
  std::int64_t ops_served = 0;
};

inline Message central_handle(CentralState& st, const Message& m) {
  Message r;
  r.cid = m.cid;
  st.ops_served++;
  switch (m.op) {
    case OP_PUSH:
      st.items.push_back(m.val);
      r.op = OP_ACK;
      r.val = kAckVal;
      break;
    case OP_POP:
      if (st.items.empty()) {
        r.op = OP_NACK;
      } else {
        r.op = OP_ACK;
        r.val = st.items.back();
        st.items.pop_back();
      }
      break;
    case OP_ENQ:
      st.items.push_back(m.val);
      r.op = OP_ACK;
      r.val = kAckVal;
      break;
    case OP_DEQ:
      if (st.items.empty()) {
        r.op = OP_NACK;
      } else {
        r.op = OP_ACK;
        r.val = st.items.front();
        st.items.pop_front();
      }
      break;
    case OP_ENQ_T:
      st.items.push_back(m.val);
      r.op = OP_ACK;
      r.val = kAckVal;
      break;
    case OP_ENQ_H:
      st.items.push_front(m.val);
      r.op = OP_ACK;
      r.val = kAckVal;
      break;
    case OP_DEQ_T:
      if (st.items.empty()) {
        r.op = OP_NACK;
      } else {
        r.op = OP_ACK;
        r.val = st.items.back();
        st.items.pop_back();
      }
      break;
    case OP_DEQ_H:
      if (st.items.empty()) {
        r.op = OP_NACK;
      } else {
        r.op = OP_ACK;
        r.val = st.items.front();
        st.items.pop_front();
      }
      break;
    default:
      r.op = OP_NACK;
      break;
  }
  return r;
}

inline Proc central_server(Ctx& ctx, CentralState& st) {
  for (;;) {
    Message m = co_await ctx.recv();
    if (m.op == OP_BATCH_OUT) {
      Message out;
      out.op = OP_BATCH_IN;
      out.val = 0;
      for (const Message& sub : m.batch) {
        out.batch.push_back(central_handle(st, sub));
        out.val++;
      }
      co_await ctx.send(m.src, std::move(out));
    } else {
      Message r = central_handle(st, m);
      co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
    }
  }
}

// Flat (or master-routed) client calls against a centralized structure.
inline Task<Message> central_request(Ctx& ctx, CoreId to, int op, Value v = 0) {
  Message m;
  m.op = op;
  m.val = v;
  m.cid = ctx.self;
  co_await ctx.send(to, std::move(m));
  co_return co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
}

inline Task<bool> central_push(Ctx& ctx, CoreId to, Value v) {
  co_return (co_await central_request(ctx, to, OP_PUSH, v)).op == OP_ACK;
}
inline Task<Value> central_pop(Ctx& ctx, CoreId to) {
  Message r = co_await central_request(ctx, to, OP_POP);
  co_return r.op == OP_ACK ? r.val : kEmpty;
}
inline Task<bool> central_enqueue(Ctx& ctx, CoreId to, Value v) {
  co_return (co_await central_request(ctx, to, OP_ENQ, v)).op == OP_ACK;
}
inline Task<Value> central_dequeue(Ctx& ctx, CoreId to) {
  Message r = co_await central_request(ctx, to, OP_DEQ);
  co_return r.op == OP_ACK ? r.val : kEmpty;
}

// --- elimination ------------------------------------------------------------------

// Matches opposite operations on the same endpoint in arrival order. Matched
// removals receive the paired insertion's value; both leave the batch, so
// neither reaches a server. Returns the replies to send and leaves the
// residual in place.
inline std::vector<Message> eliminate(std::vector<Message>& batch) {
  auto opposite = [](int op) {
    switch (op) {
      case OP_PUSH: return OP_POP;
      case OP_POP: return OP_PUSH;
      case OP_ENQ_T: return OP_DEQ_T;
      case OP_DEQ_T: return OP_ENQ_T;
      case OP_ENQ_H: return OP_DEQ_H;
      case OP_DEQ_H: return OP_ENQ_H;
      default: return OP_NONE;
    }
  };
  auto is_insert = [](int op) {
    return op == OP_PUSH || op == OP_ENQ_T || op == OP_ENQ_H;
  };

  std::vector<Message> replies;
  std::vector<bool> gone(batch.size(), false);
  for (size_t i = 0; i < batch.size(); ++i) {
    if (gone[i]) continue;
    int want = opposite(batch[i].op);
    if (want == OP_NONE) continue;
    for (size_t j = i + 1; j < batch.size(); ++j) {
      if (gone[j] || batch[j].op != want) continue;
      const Message& ins = is_insert(batch[i].op) ? batch[i] : batch[j];
      const Message& rem = is_insert(batch[i].op) ? batch[j] : batch[i];
      Message ra;
      ra.op = OP_ACK;
      ra.cid = ins.cid;
      ra.val2 = 1;  // eliminated marker
      replies.push_back(std::move(ra));
      Message rb;
      rb.op = OP_ACK;
      rb.cid = rem.cid;
      rb.val = ins.val;
      rb.val2 = 1;
      replies.push_back(std::move(rb));
      gone[i] = gone[j] = true;
      break;
    }
  }
  std::vector<Message> residual;
  for (size_t i = 0; i < batch.size(); ++i)
    if (!gone[i]) residual.push_back(std::move(batch[i]));
  batch = std::move(residual);
  return replies;
}

// --- island master ----------------------------------------------------------------

enum class MasterMode {
  Batch,          // pack requests, forward, split replies (centralized)
  CombineStack,   // send one counter per kind to the stack synchronizer
  CombineQueue,   // send one enq/deq counter pair to the queue synchronizer
};

struct MasterConfig {
  CoreId server = 0;       // destination structure server / synchronizer
  Step period = 8;         // flush timer
  int batch_cap = 16;      // early flush above this many buffered requests
  bool elim = false;
  bool split_queue_batches = true;  // one envelope per op kind for queues
  MasterMode mode = MasterMode::Batch;
  int dma_threshold = 16;  // units; larger batches go by DMA + notify
};

struct MasterState {
  std::int64_t flushes = 0;
  std::int64_t batches_sent = 0;
  std::int64_t eliminated_pairs = 0;
};

// Gathers the island's requests, batches them per destination, flushes on a
// timer (or when a buffer fills), and routes replies back to the clients.
inline Proc island_master(Ctx& ctx, const MasterConfig& cfg, MasterState& st) {
  std::vector<Message> outbuf;  // one structure, one destination
  const std::int64_t scratch = ctx.sim.alloc_mem(4096);

  auto send_batch = [&](std::vector<Message> subs) -> Task<void> {
    if (subs.empty()) co_return;
    Message b;
    b.op = OP_BATCH_OUT;
    b.val = static_cast<Value>(subs.size());
    b.batch = std::move(subs);
    if (b.size_units() > cfg.dma_threshold) {
      co_await ctx.dma(scratch, scratch + 2048,
                       static_cast<std::int64_t>(b.size_units()) * 8);
      b.via_dma = true;  // the envelope is the post-DMA notification
    }
    st.batches_sent++;
    co_await ctx.send(cfg.server, std::move(b));
  };

  auto flush = [&]() -> Task<void> {
    if (outbuf.empty()) co_return;
    st.flushes++;
    if (cfg.elim) {
      auto replies = eliminate(outbuf);
      st.eliminated_pairs += static_cast<std::int64_t>(replies.size() / 2);
      for (auto& r : replies) {
        CoreId to = static_cast<CoreId>(r.cid);
        co_await ctx.send(to, std::move(r));
      }
    }
    if (outbuf.empty()) co_return;

    switch (cfg.mode) {
      case MasterMode::Batch: {
        if (cfg.split_queue_batches) {
          std::vector<Message> enqs, deqs, rest;
          for (auto& m : outbuf) {
            if (m.op == OP_ENQ) enqs.push_back(std::move(m));
            else if (m.op == OP_DEQ) deqs.push_back(std::move(m));
            else rest.push_back(std::move(m));
          }
          co_await send_batch(std::move(enqs));
          co_await send_batch(std::move(deqs));
          co_await send_batch(std::move(rest));
        } else {
          co_await send_batch(std::move(outbuf));
        }
        break;
      }
      case MasterMode::CombineStack: {
        std::vector<Message> pushes, pops;
        for (auto& m : outbuf)
          (m.op == OP_PUSH ? pushes : pops).push_back(std::move(m));
        if (!pushes.empty()) {
          Message c;
          c.op = OP_COMBINE_PUSH;
          c.val = static_cast<Value>(pushes.size());
          c.cid = ctx.self;
          co_await ctx.send(cfg.server, std::move(c));
          Message r = co_await ctx.recv(Filter::from_ops(cfg.server, {OP_ACK}));
          // keys granted: r.key+1 .. r.key+f, in arrival order
          for (size_t i = 0; i < pushes.size(); ++i) {
            Message a;
            a.op = OP_ACK;
            a.key = r.key + 1 + static_cast<std::int64_t>(i);
            co_await ctx.send(static_cast<CoreId>(pushes[i].cid), std::move(a));
          }
        }
        if (!pops.empty()) {
          Message c;
          c.op = OP_COMBINE_POP;
          c.val = static_cast<Value>(pops.size());
          c.cid = ctx.self;
          co_await ctx.send(cfg.server, std::move(c));
          Message r = co_await ctx.recv(Filter::from_ops(cfg.server, {OP_ACK}));
          for (size_t i = 0; i < pops.size(); ++i) {
            Message a;
            a.op = OP_ACK;
            std::int64_t k = r.key - static_cast<std::int64_t>(i);
            a.key = k >= 0 ? k : -1;  // below the floor means empty
            co_await ctx.send(static_cast<CoreId>(pops[i].cid), std::move(a));
          }
        }
        break;
      }
      case MasterMode::CombineQueue: {
        std::vector<Message> enqs, deqs;
        for (auto& m : outbuf)
          (m.op == OP_ENQ ? enqs : deqs).push_back(std::move(m));
        Message c;
        c.op = OP_COMBINE_ENQDEQ;
        c.val = static_cast<Value>(enqs.size());
        c.val2 = static_cast<Value>(deqs.size());
        c.cid = ctx.self;
        co_await ctx.send(cfg.server, std::move(c));
        Message r = co_await ctx.recv(Filter::from_ops(cfg.server, {OP_ACK}));
        // r.val = tail before, r.val2 = head before, r.key = granted dequeues
        for (size_t i = 0; i < enqs.size(); ++i) {
          Message a;
          a.op = OP_ACK;
          a.key = r.val + 1 + static_cast<std::int64_t>(i);
          co_await ctx.send(static_cast<CoreId>(enqs[i].cid), std::move(a));
        }
        for (size_t i = 0; i < deqs.size(); ++i) {
          Message a;
          if (static_cast<std::int64_t>(i) < r.key) {
            a.op = OP_ACK;
            a.key = r.val2 + 1 + static_cast<std::int64_t>(i);
          } else {
            a.op = OP_NACK;
          }
          co_await ctx.send(static_cast<CoreId>(deqs[i].cid), std::move(a));
        }
        break;
      }
    }
    outbuf.clear();
  };

  // The timer arms when the first request enters an empty buffer, so an idle
  // master parks in receive and does not hold up quiescence.
  Step next_flush = 0;
  for (;;) {
    std::optional<Message> got;
    if (outbuf.empty()) {
      got = co_await ctx.recv();
    } else {
      got = co_await ctx.recv_until(next_flush);
    }
    if (!got) {
      co_await flush();
      continue;
    }
    Message& m = *got;
    if (m.op == OP_BATCH_IN) {
      for (Message& sub : m.batch) {
        CoreId to = static_cast<CoreId>(sub.cid);
        co_await ctx.send(to, Message(sub));
      }
    } else {
      if (outbuf.empty()) next_flush = ctx.now() + cfg.period;
      outbuf.push_back(std::move(m));
      if (static_cast<int>(outbuf.size()) >= cfg.batch_cap) co_await flush();
    }
  }
}

}  // namespace mpds
