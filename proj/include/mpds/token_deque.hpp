#pragma once

#include <cassert>
#include <deque>
#include <map>
#include <vector>

#include "mpds/token_common.hpp"

namespace mpds {

// Token-based deque. Tail-side requests travel forward (the tail token moves
// to the next server when its chunk fills and back to the previous one when
// it drains); head-side requests travel backward (the head token moves to
// the previous server when its chunk fills and forward when it drains).
// Token arrival triggers batch service of the parked requests for that end,
// with opposite-operation pairs eliminated first.
struct TokenDequeConfig {
  int ns = 2;
  int capacity = 64;
  bool dynamic = false;
  std::vector<CoreId> server_cores;
};

struct TokenDequeState {
  int my_sid = 0;
  bool has_head = false;
  bool has_tail = false;
  // A token that wraps a full ring in its grow direction lands on the server
  // holding the other token; the local chunk then cannot take insertions for
  // the wrapped end without breaking the chunk order, so inserts are refused
  // and the first matching dequeue bounces the token back out. (Static only.)
  bool wrapped_tail = false;
  bool wrapped_head = false;
  std::map<std::int64_t, ClientTableEntry> clients;
  std::int64_t table_replies = 0;
  std::int64_t eliminations = 0;

  std::deque<Value> ld;  // static storage
  // Dynamic storage: chunks keyed by spiral coil; the coil rides inside the
  // token message, so both fingers name chunks consistently across servers.
  std::map<std::int64_t, std::deque<Value>> chunks;
  std::int64_t tail_coil = 0;
  std::int64_t head_coil = 0;

  bool full_deque() const { return wrapped_tail || wrapped_head; }
};

namespace td_detail {

inline std::deque<Value>& tail_chunk(const TokenDequeConfig& cfg,
                                     TokenDequeState& st) {
  return cfg.dynamic ? st.chunks[st.tail_coil] : st.ld;
}
inline std::deque<Value>& head_chunk(const TokenDequeConfig& cfg,
                                     TokenDequeState& st) {
  return cfg.dynamic ? st.chunks[st.head_coil] : st.ld;
}
inline bool full_t(const TokenDequeConfig& cfg, TokenDequeState& st) {
  return tail_chunk(cfg, st).size() >= static_cast<size_t>(cfg.capacity);
}
inline bool full_h(const TokenDequeConfig& cfg, TokenDequeState& st) {
  return head_chunk(cfg, st).size() >= static_cast<size_t>(cfg.capacity);
}
inline bool empty_t(const TokenDequeConfig& cfg, TokenDequeState& st) {
  return tail_chunk(cfg, st).empty();
}
inline bool empty_h(const TokenDequeConfig& cfg, TokenDequeState& st) {
  return head_chunk(cfg, st).empty();
}
inline bool coloc_empty(const TokenDequeConfig& cfg, TokenDequeState& st) {
  if (!st.has_head || !st.has_tail) return false;
  if (!cfg.dynamic) return !st.full_deque() && st.ld.empty();
  return st.tail_coil == st.head_coil && tail_chunk(cfg, st).empty();
}

}  // namespace td_detail

inline Proc token_deque_server(Ctx& ctx, const TokenDequeConfig& cfg,
                               TokenDequeState& st, TokenAudit* audit) {
  using namespace td_detail;
  const int ns = cfg.ns;
  const CoreId next_core = cfg.server_cores[ring_next(st.my_sid, ns)];
  const CoreId prev_core = cfg.server_cores[ring_prev(st.my_sid, ns)];

  auto respond = [&](const Message& m, int status, Value data) -> Task<void> {
    Message r;
    r.op = status;
    r.val = data;
    if (m.sid == -1 || m.sid == st.my_sid) {
      if (m.sid == st.my_sid) st.clients.erase(m.cid);
      r.sid = st.my_sid;
      co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
    } else {
      r.cid = m.cid;
      r.sid = st.my_sid;
      co_await ctx.send(cfg.server_cores[m.sid], std::move(r));
    }
  };

  auto forward = [&](Message m, CoreId to, std::int64_t tk,
                     std::int64_t coil) -> Task<void> {
    m.tk = tk;
    m.key = coil;
    if (m.sid == -1) {
      st.clients[m.cid] = {m.op, m.val, false};
      m.sid = st.my_sid;
    }
    co_await ctx.send(to, std::move(m));
  };

  // Batch service on token arrival: eliminate opposite pairs for this end,
  // then apply the survivors to the local chunk.
  auto serve_old = [&](bool tail_end) {
    int enq_op = tail_end ? OP_ENQ_T : OP_ENQ_H;
    int deq_op = tail_end ? OP_DEQ_T : OP_DEQ_H;
    for (auto& [cid1, e1] : st.clients) {
      if (e1.op != enq_op || e1.served) continue;
      for (auto& [cid2, e2] : st.clients) {
        if (e2.op != deq_op || e2.served) continue;
        e2.data = e1.data;
        e1.data = 0;
        e1.served = true;
        e2.served = true;
        st.eliminations++;
        break;
      }
    }
    if (cfg.dynamic || !st.full_deque()) {
      for (auto& [cid, e] : st.clients) {
        if (e.op != enq_op || e.served) continue;
        auto& chunk = tail_end ? tail_chunk(cfg, st) : head_chunk(cfg, st);
        if (chunk.size() >= static_cast<size_t>(cfg.capacity)) continue;
        if (tail_end) chunk.push_back(e.data);
        else chunk.push_front(e.data);
        e.data = 0;
        e.served = true;
      }
    }
    for (auto& [cid, e] : st.clients) {
      if (e.op != deq_op || e.served) continue;
      auto& chunk = tail_end ? tail_chunk(cfg, st) : head_chunk(cfg, st);
      if (chunk.empty()) continue;
      if (tail_end) {
        e.data = chunk.back();
        chunk.pop_back();
      } else {
        e.data = chunk.front();
        chunk.pop_front();
      }
      e.served = true;
    }
  };

  auto reply_if_served = [&](const Message& m) -> Task<bool> {
    auto it = st.clients.find(m.cid);
    if (it == st.clients.end() || !it->second.served) co_return false;
    Message r;
    r.op = OP_ACK;
    r.val = it->second.data;
    r.sid = st.my_sid;
    st.clients.erase(it);
    st.table_replies++;
    co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
    co_return true;
  };

  for (;;) {
    Message m = co_await ctx.recv(Filter::ops(
        {OP_ENQ_T, OP_DEQ_T, OP_ENQ_H, OP_DEQ_H, OP_ACK, OP_NACK}));

    if (m.op == OP_ACK || m.op == OP_NACK) {
      st.clients.erase(m.cid);
      Message r;
      r.op = m.op;
      r.val = m.val;
      r.sid = m.sid;
      co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
      continue;
    }

    switch (m.op) {
      case OP_ENQ_T: {
        if (m.tk == TK_TAIL) {  // grow arrival (from the previous server)
          st.has_tail = true;
          if (cfg.dynamic) st.tail_coil = m.key;
          else if (st.has_head) st.wrapped_tail = true;
          if (audit) audit->acquire(ctx.now(), st.my_sid, TK_TAIL);
          serve_old(true);
        }
        if (co_await reply_if_served(m)) break;
        if (!cfg.dynamic && st.full_deque()) {
          co_await respond(m, OP_NACK, 0);
        } else if (st.has_tail && !full_t(cfg, st)) {
          tail_chunk(cfg, st).push_back(m.val);
          co_await respond(m, OP_ACK, 0);
        } else if (st.has_tail && m.tk == TK_TAIL) {
          // the token just landed here; hold it for a round so the other
          // token can catch up, and revisit this request afterwards
          m.tk = TK_NONE;
          co_await ctx.send(ctx.self, std::move(m));
        } else {
          if (st.has_tail) {
            bool pre = full_t(cfg, st);
            st.has_tail = false;
            st.wrapped_tail = st.wrapped_head = false;
            std::int64_t coil = st.tail_coil + (st.my_sid == ns - 1 ? 1 : 0);
            if (audit) {
              audit->release(ctx.now(), st.my_sid, TK_TAIL);
              audit->forward(ctx.now(), st.my_sid, TK_TAIL,
                             ring_next(st.my_sid, ns), pre);
            }
            co_await forward(std::move(m), next_core, TK_TAIL, coil);
          } else {
            co_await forward(std::move(m), next_core, TK_NONE, 0);
          }
        }
        break;
      }
      case OP_DEQ_T: {
        if (m.tk == TK_TAIL) {  // shrink arrival (from the next server)
          st.has_tail = true;
          if (cfg.dynamic) st.tail_coil = m.key;
          if (audit) audit->acquire(ctx.now(), st.my_sid, TK_TAIL);
          serve_old(true);
        }
        if (co_await reply_if_served(m)) break;
        if (!cfg.dynamic && st.wrapped_tail) {
          // chunk order: the global tail is at the previous server
          st.has_tail = false;
          st.wrapped_tail = st.wrapped_head = false;
          if (audit) {
            audit->release(ctx.now(), st.my_sid, TK_TAIL);
            audit->forward(ctx.now(), st.my_sid, TK_TAIL,
                           ring_prev(st.my_sid, ns), true);
          }
          co_await forward(std::move(m), prev_core, TK_TAIL, 0);
        } else if (coloc_empty(cfg, st)) {
          co_await respond(m, OP_NACK, 0);
        } else if (st.has_tail && !empty_t(cfg, st)) {
          auto& chunk = tail_chunk(cfg, st);
          Value v = chunk.back();
          chunk.pop_back();
          co_await respond(m, OP_ACK, v);
        } else if (st.has_tail && m.tk == TK_TAIL) {
          m.tk = TK_NONE;
          co_await ctx.send(ctx.self, std::move(m));
        } else {
          if (st.has_tail) {
            bool pre = empty_t(cfg, st);
            st.has_tail = false;
            st.wrapped_tail = st.wrapped_head = false;
            std::int64_t coil =
                st.tail_coil - (st.my_sid == 0 ? 1 : 0);
            if (cfg.dynamic) st.chunks.erase(st.tail_coil);
            if (audit) {
              audit->release(ctx.now(), st.my_sid, TK_TAIL);
              audit->forward(ctx.now(), st.my_sid, TK_TAIL,
                             ring_prev(st.my_sid, ns), pre);
            }
            co_await forward(std::move(m), prev_core, TK_TAIL, coil);
          } else {
            co_await forward(std::move(m), prev_core, TK_NONE, 0);
          }
        }
        break;
      }
      case OP_ENQ_H: {
        if (m.tk == TK_HEAD) {  // grow arrival (from the next server)
          st.has_head = true;
          if (cfg.dynamic) st.head_coil = m.key;
          else if (st.has_tail) st.wrapped_head = true;
          if (audit) audit->acquire(ctx.now(), st.my_sid, TK_HEAD);
          serve_old(false);
        }
        if (co_await reply_if_served(m)) break;
        if (!cfg.dynamic && st.full_deque()) {
          co_await respond(m, OP_NACK, 0);
        } else if (st.has_head && !full_h(cfg, st)) {
          head_chunk(cfg, st).push_front(m.val);
          co_await respond(m, OP_ACK, 0);
        } else if (st.has_head && m.tk == TK_HEAD) {
          m.tk = TK_NONE;
          co_await ctx.send(ctx.self, std::move(m));
        } else {
          if (st.has_head) {
            bool pre = full_h(cfg, st);
            st.has_head = false;
            st.wrapped_tail = st.wrapped_head = false;
            std::int64_t coil =
                st.head_coil - (st.my_sid == 0 ? 1 : 0);
            if (audit) {
              audit->release(ctx.now(), st.my_sid, TK_HEAD);
              audit->forward(ctx.now(), st.my_sid, TK_HEAD,
                             ring_prev(st.my_sid, ns), pre);
            }
            co_await forward(std::move(m), prev_core, TK_HEAD, coil);
          } else {
            co_await forward(std::move(m), prev_core, TK_NONE, 0);
          }
        }
        break;
      }
      case OP_DEQ_H: {
        if (m.tk == TK_HEAD) {  // shrink arrival (from the previous server)
          st.has_head = true;
          if (cfg.dynamic) st.head_coil = m.key;
          if (audit) audit->acquire(ctx.now(), st.my_sid, TK_HEAD);
          serve_old(false);
        }
        if (co_await reply_if_served(m)) break;
        if (!cfg.dynamic && st.wrapped_head) {
          // the global head is at the next server
          st.has_head = false;
          st.wrapped_tail = st.wrapped_head = false;
          if (audit) {
            audit->release(ctx.now(), st.my_sid, TK_HEAD);
            audit->forward(ctx.now(), st.my_sid, TK_HEAD,
                           ring_next(st.my_sid, ns), true);
          }
          co_await forward(std::move(m), next_core, TK_HEAD, 0);
        } else if (coloc_empty(cfg, st)) {
          co_await respond(m, OP_NACK, 0);
        } else if (st.has_head && !empty_h(cfg, st)) {
          auto& chunk = head_chunk(cfg, st);
          Value v = chunk.front();
          chunk.pop_front();
          co_await respond(m, OP_ACK, v);
        } else if (st.has_head && m.tk == TK_HEAD) {
          m.tk = TK_NONE;
          co_await ctx.send(ctx.self, std::move(m));
        } else {
          if (st.has_head) {
            bool pre = empty_h(cfg, st);
            st.has_head = false;
            st.wrapped_tail = st.wrapped_head = false;
            std::int64_t coil =
                st.head_coil + (st.my_sid == ns - 1 ? 1 : 0);
            if (cfg.dynamic) st.chunks.erase(st.head_coil);
            if (audit) {
              audit->release(ctx.now(), st.my_sid, TK_HEAD);
              audit->forward(ctx.now(), st.my_sid, TK_HEAD,
                             ring_next(st.my_sid, ns), pre);
            }
            co_await forward(std::move(m), next_core, TK_HEAD, coil);
          } else {
            co_await forward(std::move(m), next_core, TK_NONE, 0);
          }
        }
        break;
      }
    }
  }
}

inline Task<bool> tdeque_enqueue(Ctx& ctx, const TokenDequeConfig& cfg,
                                 int& sid, bool tail, Value v) {
  Message m;
  m.op = tail ? OP_ENQ_T : OP_ENQ_H;
  m.val = v;
  m.cid = ctx.self;
  m.sid = -1;
  co_await ctx.send(cfg.server_cores[sid], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  sid = static_cast<int>(r.sid);
  co_return r.op == OP_ACK;
}

inline Task<Value> tdeque_dequeue(Ctx& ctx, const TokenDequeConfig& cfg,
                                  int& sid, bool tail) {
  Message m;
  m.op = tail ? OP_DEQ_T : OP_DEQ_H;
  m.cid = ctx.self;
  m.sid = -1;
  co_await ctx.send(cfg.server_cores[sid], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  sid = static_cast<int>(r.sid);
  co_return r.op == OP_ACK ? r.val : kEmpty;
}

}  // namespace mpds
