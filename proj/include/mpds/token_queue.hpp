#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>
#include <vector>

#include "mpds/token_common.hpp"

namespace mpds {

// Token-based queue: a tail-token server accepts enqueues, a head-token
// server serves dequeues, both tokens travel forward around the ring. A
// server that lacks the token records direct client requests in its client
// table before forwarding them, serves the parked batch when the token
// arrives, and answers the original message from the table when it returns
// from its ring round-trip.
struct TokenQueueConfig {
  int ns = 2;
  int capacity = 64;      // elements per chunk
  bool dynamic = false;   // dynamic variant: spiral chunks, never full
  std::vector<CoreId> server_cores;
};

struct TokenQueueState {
  int my_sid = 0;
  bool has_head = false;
  bool has_tail = false;
  // True while the tail token sits on the head server after a full ring
  // wrap; enqueues are refused so the chunk order stays FIFO. Cleared when
  // either token departs. (Static variant only.)
  bool full_queue = false;
  std::map<std::int64_t, ClientTableEntry> clients;

  std::int64_t table_replies = 0;  // requests answered from the client table

  std::deque<Value> lq;                          // static storage
  std::map<std::int64_t, std::deque<Value>> chunks;  // dynamic, keyed by round
  std::int64_t head_round = 0;
  std::int64_t tail_round = 0;
};

namespace tq_detail {

inline bool full(const TokenQueueConfig& cfg, TokenQueueState& st) {
  if (!cfg.dynamic) return st.lq.size() >= static_cast<size_t>(cfg.capacity);
  return st.chunks[st.tail_round].size() >= static_cast<size_t>(cfg.capacity);
}
inline bool empty(const TokenQueueConfig& cfg, TokenQueueState& st) {
  if (!cfg.dynamic) return st.lq.empty();
  auto it = st.chunks.find(st.head_round);
  return it == st.chunks.end() || it->second.empty();
}
inline void enq(const TokenQueueConfig& cfg, TokenQueueState& st, Value v) {
  if (!cfg.dynamic) st.lq.push_back(v);
  else st.chunks[st.tail_round].push_back(v);
}
inline Value deq(const TokenQueueConfig& cfg, TokenQueueState& st) {
  if (!cfg.dynamic) {
    Value v = st.lq.front();
    st.lq.pop_front();
    return v;
  }
  auto& c = st.chunks[st.head_round];
  Value v = c.front();
  c.pop_front();
  return v;
}

}  // namespace tq_detail

inline Proc token_queue_server(Ctx& ctx, const TokenQueueConfig& cfg,
                               TokenQueueState& st, TokenAudit* audit) {
  using namespace tq_detail;
  const int ns = cfg.ns;
  const CoreId next_core = cfg.server_cores[ring_next(st.my_sid, ns)];

  auto respond = [&](const Message& m, int status, Value data) -> Task<void> {
    Message r;
    r.op = status;
    r.val = data;
    if (m.sid == -1) {
      r.sid = st.my_sid;
      co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
    } else if (m.sid == st.my_sid) {
      // our own forward came back and we can serve it now
      st.clients.erase(m.cid);
      r.sid = st.my_sid;
      co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
    } else {
      r.cid = m.cid;
      r.sid = st.my_sid;
      co_await ctx.send(cfg.server_cores[m.sid], std::move(r));
    }
  };

  auto forward = [&](Message m, std::int64_t tk) -> Task<void> {
    m.tk = tk;
    if (m.sid == -1) {
      st.clients[m.cid] = {m.op, m.val, false};
      m.sid = st.my_sid;
    }
    co_await ctx.send(next_core, std::move(m));
  };

  auto serve_old_enqueues = [&]() {
    if (!cfg.dynamic && st.full_queue) return;
    for (auto& [cid, e] : st.clients)
      if (e.op == OP_ENQ && !e.served && !full(cfg, st)) {
        enq(cfg, st, e.data);
        e.data = 0;
        e.served = true;
      }
  };
  auto serve_old_dequeues = [&]() {
    for (auto& [cid, e] : st.clients)
      if (e.op == OP_DEQ && !e.served && !empty(cfg, st)) {
        e.data = deq(cfg, st);
        e.served = true;
      }
  };

  for (;;) {
    Message m = co_await ctx.recv(Filter::ops({OP_ENQ, OP_DEQ, OP_ACK, OP_NACK}));

    if (m.op == OP_ACK || m.op == OP_NACK) {
      // result of a forwarded request executed by another server
      st.clients.erase(m.cid);
      Message r;
      r.op = m.op;
      r.val = m.val;
      r.sid = m.sid;
      co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
      continue;
    }

    if (m.op == OP_ENQ) {
      if (m.tk == TK_TAIL) {
        st.has_tail = true;
        if (audit) audit->acquire(ctx.now(), st.my_sid, TK_TAIL);
        if (!cfg.dynamic && st.has_head) st.full_queue = true;
        serve_old_enqueues();
      }
      if (auto it = st.clients.find(m.cid);
          it != st.clients.end() && it->second.served) {
        Message r;
        r.op = OP_ACK;
        r.val = it->second.data;
        r.sid = st.my_sid;
        st.clients.erase(it);
        st.table_replies++;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
        continue;
      }
      if (!st.has_tail) {
        co_await forward(std::move(m), TK_NONE);
      } else if (!cfg.dynamic && st.full_queue) {
        co_await respond(m, OP_NACK, 0);
      } else if (!full(cfg, st)) {
        enq(cfg, st, m.val);
        co_await respond(m, OP_ACK, 0);
      } else {
        // move the tail token to the next server
        st.has_tail = false;
        st.full_queue = false;
        if (audit) {
          audit->release(ctx.now(), st.my_sid, TK_TAIL);
          audit->forward(ctx.now(), st.my_sid, TK_TAIL,
                         ring_next(st.my_sid, ns), full(cfg, st));
        }
        if (cfg.dynamic) st.tail_round++;
        co_await forward(std::move(m), TK_TAIL);
      }
    } else {  // OP_DEQ
      if (m.tk == TK_HEAD) {
        st.has_head = true;
        if (audit) audit->acquire(ctx.now(), st.my_sid, TK_HEAD);
        serve_old_dequeues();
      }
      if (auto it = st.clients.find(m.cid);
          it != st.clients.end() && it->second.served) {
        Message r;
        r.op = OP_ACK;
        r.val = it->second.data;
        r.sid = st.my_sid;
        st.clients.erase(it);
        st.table_replies++;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
        continue;
      }
      if (!st.has_head) {
        co_await forward(std::move(m), TK_NONE);
      } else if (!empty(cfg, st)) {
        Value v = deq(cfg, st);
        co_await respond(m, OP_ACK, v);
      } else if (!cfg.dynamic ? (st.has_tail && !st.full_queue)
                              : (st.has_tail && st.tail_round == st.head_round)) {
        // the whole queue is empty
        if (cfg.dynamic) {
          st.tail_round = st.head_round = 0;
          st.chunks.clear();
        }
        co_await respond(m, OP_NACK, 0);
      } else {
        // move the head token to the next server
        st.has_head = false;
        if (!cfg.dynamic) st.full_queue = false;
        if (audit) {
          audit->release(ctx.now(), st.my_sid, TK_HEAD);
          audit->forward(ctx.now(), st.my_sid, TK_HEAD,
                         ring_next(st.my_sid, ns), empty(cfg, st));
        }
        if (cfg.dynamic) st.head_round++;
        co_await forward(std::move(m), TK_HEAD);
      }
    }
  }
}

// Clients keep separate lazily updated server ids per operation kind.
inline Task<bool> tqueue_enqueue(Ctx& ctx, const TokenQueueConfig& cfg,
                                 int& enq_sid, Value v) {
  Message m;
  m.op = OP_ENQ;
  m.val = v;
  m.cid = ctx.self;
  m.sid = -1;
  co_await ctx.send(cfg.server_cores[enq_sid], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  enq_sid = static_cast<int>(r.sid);
  co_return r.op == OP_ACK;
}

inline Task<Value> tqueue_dequeue(Ctx& ctx, const TokenQueueConfig& cfg,
                                  int& deq_sid) {
  Message m;
  m.op = OP_DEQ;
  m.cid = ctx.self;
  m.sid = -1;
  co_await ctx.send(cfg.server_cores[deq_sid], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  deq_sid = static_cast<int>(r.sid);
  co_return r.op == OP_ACK ? r.val : kEmpty;
}

// Static-variant audit helper: global content is the concatenation of local
// queues from the head-token server forward to the tail-token server.
inline std::vector<Value> token_queue_contents(
    const TokenQueueConfig& cfg, std::vector<TokenQueueState*> servers) {
  std::vector<Value> out;
  int h = 0;
  for (int i = 0; i < cfg.ns; ++i)
    if (servers[i]->has_head) h = i;
  for (int k = 0; k < cfg.ns; ++k) {
    auto& lq = servers[(h + k) % cfg.ns]->lq;
    out.insert(out.end(), lq.begin(), lq.end());
    if (servers[(h + k) % cfg.ns]->has_tail) break;
  }
  return out;
}

// Dynamic-variant audit helper: non-empty chunks as (server, round, size),
// in spiral order of allocation.
inline std::vector<std::tuple<int, std::int64_t, std::size_t>>
token_queue_chunk_tags(const TokenQueueConfig& cfg,
                       std::vector<TokenQueueState*> servers) {
  std::vector<std::tuple<int, std::int64_t, std::size_t>> tags;
  for (int s = 0; s < cfg.ns; ++s)
    for (const auto& [round, chunk] : servers[s]->chunks)
      if (!chunk.empty()) tags.push_back({s, round, chunk.size()});
  std::sort(tags.begin(), tags.end(), [&](const auto& a, const auto& b) {
    auto pos = [&](const auto& t) {
      return std::get<1>(t) * cfg.ns + std::get<0>(t);
    };
    return pos(a) < pos(b);
  });
  return tags;
}

}  // namespace mpds
