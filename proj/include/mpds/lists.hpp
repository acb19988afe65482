#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpds/token_common.hpp"

namespace mpds {

// Distributed lists. Insert follows a token; search and delete broadcast to
// all servers in parallel. NACK replies distinguish duplicate from full in
// the payload, the client-visible boolean collapses both.
inline constexpr Value kNackDup = 1;
inline constexpr Value kNackFull = 2;

struct ListConfig {
  int ns = 2;
  int capacity = 4;     // elements per chunk / per sorted local list
  int chunk_move = 0;   // sorted list: elements shipped per move (0 = cap/2)
  std::int64_t max_rounds = 0;  // unsorted: 0 = unbounded spiral
  std::vector<CoreId> server_cores;

  int move_size() const {
    return chunk_move > 0 ? chunk_move : (capacity + 1) / 2;
  }
};

// tk values on list insert messages
inline constexpr std::int64_t kListProbe = -2;   // phase-1 broadcast (alt)
inline constexpr std::int64_t kListPlain = -1;   // targeted request

// --- unsorted list -----------------------------------------------------------

struct UListState {
  int my_id = 0;
  int token = 0;
  std::int64_t round = 0;
  std::map<std::int64_t, std::vector<std::pair<std::int64_t, std::string>>>
      chunks;  // keyed by allocation round

  bool contains(std::int64_t key) const {
    for (const auto& [r, c] : chunks)
      for (const auto& e : c)
        if (e.first == key) return true;
    return false;
  }
  bool erase(std::int64_t key) {
    for (auto& [r, c] : chunks)
      for (auto it = c.begin(); it != c.end(); ++it)
        if (it->first == key) {
          c.erase(it);
          return true;
        }
    return false;
  }
  std::vector<std::int64_t> keys() const {
    std::vector<std::int64_t> out;
    for (const auto& [r, c] : chunks)
      for (const auto& e : c) out.push_back(e.first);
    return out;
  }
};

// One insert token walks the ring; every server on the path rejects
// duplicates. Once the list has wrapped (round > 0), the token server first
// sends a fresh request around the whole ring for its duplicate check (mloop
// marks the completed lap) and only then inserts.
inline Proc ulist_server(Ctx& ctx, const ListConfig& cfg, UListState& st) {
  const int ns = cfg.ns;
  for (;;) {
    Message m = co_await ctx.recv(
        Filter::ops({OP_LIST_INSERT, OP_LIST_SEARCH, OP_LIST_DELETE}));
    switch (m.op) {
      case OP_LIST_INSERT: {
        if (m.tk == TK_TOKEN) {
          st.token = st.my_id;
          st.chunks[st.round];  // allocate this round's chunk
        }
        bool present = st.contains(m.key);
        if (present) {
          Message r;
          r.op = OP_NACK;
          r.val = kNackDup;
          co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
        } else if (st.token != st.my_id) {
          Message f = m;
          f.tk = kListPlain;
          if (st.my_id == ns - 1) f.flag = true;  // completed the wrap
          co_await ctx.send(cfg.server_cores[ring_next(st.my_id, ns)],
                            std::move(f));
        } else if (st.my_id != ns - 1 && st.round > 0 && !m.flag) {
          // list spans several servers: finish the duplicate-check lap
          // before inserting; the token stays here
          Message f = m;
          f.tk = kListPlain;
          co_await ctx.send(cfg.server_cores[ring_next(st.my_id, ns)],
                            std::move(f));
        } else {
          auto& chunk = st.chunks[st.round];
          if (chunk.size() < static_cast<size_t>(cfg.capacity)) {
            chunk.push_back({m.key, m.data});
            Message r;
            r.op = OP_ACK;
            co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
          } else if (cfg.max_rounds > 0 && st.round + 1 >= cfg.max_rounds &&
                     st.my_id == ns - 1) {
            Message r;
            r.op = OP_NACK;
            r.val = kNackFull;
            co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
          } else {
            st.round++;
            st.token = ring_next(st.my_id, ns);
            Message f = m;
            f.tk = TK_TOKEN;
            co_await ctx.send(cfg.server_cores[st.token], std::move(f));
          }
        }
        break;
      }
      case OP_LIST_SEARCH: {
        Message r;
        r.op = st.contains(m.key) ? OP_ACK : OP_NACK;
        r.sid = st.my_id;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
        break;
      }
      case OP_LIST_DELETE: {
        Message r;
        r.op = st.erase(m.key) ? OP_ACK : OP_NACK;
        r.sid = st.my_id;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
        break;
      }
    }
  }
}

inline Task<bool> ulist_insert(Ctx& ctx, const ListConfig& cfg,
                               std::int64_t key, std::string data) {
  Message m;
  m.op = OP_LIST_INSERT;
  m.cid = ctx.self;
  m.key = key;
  m.data = std::move(data);
  m.tk = kListPlain;
  co_await ctx.send(cfg.server_cores[0], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  co_return r.op == OP_ACK;
}

struct BroadcastResult {
  bool found = false;
  int acks = 0;
};

inline Task<BroadcastResult> list_broadcast(Ctx& ctx, const ListConfig& cfg,
                                            int op, std::int64_t key) {
  for (int s = 0; s < cfg.ns; ++s) {
    Message m;
    m.op = op;
    m.cid = ctx.self;
    m.key = key;
    m.tk = kListPlain;
    co_await ctx.send(cfg.server_cores[s], std::move(m));
  }
  BroadcastResult out;
  for (int c = 0; c < cfg.ns; ++c) {
    Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
    if (r.op == OP_ACK) {
      out.found = true;
      out.acks++;
    }
  }
  co_return out;
}

inline Task<BroadcastResult> ulist_search(Ctx& ctx, const ListConfig& cfg,
                                          std::int64_t key) {
  return list_broadcast(ctx, cfg, OP_LIST_SEARCH, key);
}
inline Task<BroadcastResult> ulist_delete(Ctx& ctx, const ListConfig& cfg,
                                          std::int64_t key) {
  return list_broadcast(ctx, cfg, OP_LIST_DELETE, key);
}

// --- unsorted list, alternative insert ------------------------------------------

// Phase 1 probes all servers (tk = -2): each reports presence and whether it
// holds the token. Phase 2 targets the reported token server; the request
// chases the token along the ring if it moved, duplicate-checking each hop.
inline Proc ulist_alt_server(Ctx& ctx, const ListConfig& cfg, UListState& st) {
  const int ns = cfg.ns;
  for (;;) {
    Message m = co_await ctx.recv(
        Filter::ops({OP_LIST_INSERT, OP_LIST_SEARCH, OP_LIST_DELETE}));
    switch (m.op) {
      case OP_LIST_INSERT: {
        if (m.tk == TK_TOKEN) {
          st.token = st.my_id;
          st.chunks[st.round];
        }
        bool present = st.contains(m.key);
        if (m.tk == kListProbe) {
          Message r;
          r.op = present ? OP_ACK : OP_NACK;
          r.sid = st.my_id;
          r.val = st.token == st.my_id ? 1 : 0;  // is_token
          co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
          break;
        }
        if (present) {
          Message r;
          r.op = OP_NACK;
          r.val = kNackDup;
          co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
        } else if (st.token != st.my_id) {
          Message f = m;
          f.tk = kListPlain;
          co_await ctx.send(cfg.server_cores[ring_next(st.my_id, ns)],
                            std::move(f));
        } else {
          auto& chunk = st.chunks[st.round];
          if (chunk.size() < static_cast<size_t>(cfg.capacity)) {
            chunk.push_back({m.key, m.data});
            Message r;
            r.op = OP_ACK;
            co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
          } else {
            st.round++;
            st.token = ring_next(st.my_id, ns);
            Message f = m;
            f.tk = TK_TOKEN;
            co_await ctx.send(cfg.server_cores[st.token], std::move(f));
          }
        }
        break;
      }
      case OP_LIST_SEARCH: {
        Message r;
        r.op = st.contains(m.key) ? OP_ACK : OP_NACK;
        r.sid = st.my_id;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
        break;
      }
      case OP_LIST_DELETE: {
        Message r;
        r.op = st.erase(m.key) ? OP_ACK : OP_NACK;
        r.sid = st.my_id;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
        break;
      }
    }
  }
}

inline Task<bool> ulist_alt_insert(Ctx& ctx, const ListConfig& cfg,
                                   std::int64_t key, std::string data) {
  for (int s = 0; s < cfg.ns; ++s) {
    Message m;
    m.op = OP_LIST_INSERT;
    m.cid = ctx.self;
    m.key = key;
    m.tk = kListProbe;
    co_await ctx.send(cfg.server_cores[s], std::move(m));
  }
  bool found = false;
  int tid = 0;
  for (int c = 0; c < cfg.ns; ++c) {
    Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
    if (r.op == OP_ACK) found = true;
    if (r.val == 1) tid = static_cast<int>(r.sid);
  }
  if (found) co_return false;
  Message m;
  m.op = OP_LIST_INSERT;
  m.cid = ctx.self;
  m.key = key;
  m.data = std::move(data);
  m.tk = kListPlain;
  co_await ctx.send(cfg.server_cores[tid], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  co_return r.op == OP_ACK;
}

// --- sorted list -----------------------------------------------------------------

struct SListState {
  int my_id = 0;
  std::vector<std::pair<std::int64_t, std::string>> llist;  // sorted by key
  std::map<std::int64_t, std::int64_t> cv;  // served search/delete per client
  std::int64_t moves = 0;

  bool contains(std::int64_t key) const {
    return std::binary_search(
        llist.begin(), llist.end(), std::pair<std::int64_t, std::string>{key, {}},
        [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  void insert_sorted(std::int64_t key, std::string data) {
    auto it = std::lower_bound(
        llist.begin(), llist.end(), key,
        [](const auto& e, std::int64_t k) { return e.first < k; });
    llist.insert(it, {key, std::move(data)});
  }
  bool erase(std::int64_t key) {
    auto it = std::lower_bound(
        llist.begin(), llist.end(), key,
        [](const auto& e, std::int64_t k) { return e.first < k; });
    if (it == llist.end() || it->first != key) return false;
    llist.erase(it);
    return true;
  }
};

namespace slist_detail {

inline void pack_cv(const std::map<std::int64_t, std::int64_t>& cv,
                    Message& m) {
  for (const auto& [cid, n] : cv) {
    Message e;
    e.op = OP_LIST_CV;
    e.cid = cid;
    e.val = n;
    m.batch.push_back(std::move(e));
  }
}

inline std::map<std::int64_t, std::int64_t> unpack_cv(const Message& m) {
  std::map<std::int64_t, std::int64_t> cv;
  for (const auto& e : m.batch)
    if (e.op == OP_LIST_CV) cv[e.cid] = e.val;
  return cv;
}

inline bool lags(const std::map<std::int64_t, std::int64_t>& mine,
                 const std::map<std::int64_t, std::int64_t>& theirs) {
  for (const auto& [cid, n] : theirs) {
    auto it = mine.find(cid);
    if (it == mine.end() ? n > 0 : it->second < n) return true;
  }
  return false;
}

}  // namespace slist_detail

// Sorted list server. All keys on server i are smaller than all keys on
// server i+1. When a full server must absorb an element it ships its largest
// move_size() elements to the next server; both neighbours first serve
// pending search/delete traffic until their client vectors agree, so a
// concurrent broadcast is answered by exactly one of them.
inline Proc slist_server(Ctx& ctx, const ListConfig& cfg, SListState& st) {
  using namespace slist_detail;
  const int ns = cfg.ns;
  const CoreId next_core =
      st.my_id + 1 < ns ? cfg.server_cores[st.my_id + 1] : -1;
  // staging area for outgoing bulk transfers
  const std::int64_t scratch =
      ctx.sim.alloc_mem(static_cast<std::int64_t>(cfg.move_size()) * 32);

  auto serve_sd = [&](const Message& m) -> Task<void> {
    st.cv[m.cid]++;
    Message r;
    r.sid = st.my_id;
    if (m.op == OP_LIST_SEARCH) {
      r.op = st.contains(m.key) ? OP_ACK : OP_NACK;
    } else {
      r.op = st.erase(m.key) ? OP_ACK : OP_NACK;
    }
    co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
  };

  // Ship our maximal chunk to the next server to make room; true on success.
  auto make_room = [&]() -> Task<bool> {
    if (st.my_id == ns - 1) co_return false;
    st.moves++;
    Message req;
    req.op = OP_LIST_REQC;
    req.cid = ctx.self;
    co_await ctx.send(next_core, std::move(req));
    Message cvm = co_await ctx.recv(Filter::from_ops(next_core, {OP_LIST_CV}));
    auto nbr = unpack_cv(cvm);
    while (lags(st.cv, nbr)) {
      Message sd =
          co_await ctx.recv(Filter::ops({OP_LIST_SEARCH, OP_LIST_DELETE}));
      co_await serve_sd(sd);
    }
    int take = std::min<int>(cfg.move_size(), static_cast<int>(st.llist.size()));
    Message chunk;
    chunk.op = OP_LIST_CHUNK;
    chunk.cid = ctx.self;
    pack_cv(st.cv, chunk);  // snapshot, so the peer can catch up symmetrically
    for (int i = static_cast<int>(st.llist.size()) - take;
         i < static_cast<int>(st.llist.size()); ++i) {
      Message e;
      e.op = OP_LIST_CHUNK;
      e.key = st.llist[i].first;
      e.data = st.llist[i].second;
      chunk.val2++;
      chunk.batch.push_back(std::move(e));
    }
    // bulk payload moves by DMA; the message is the completion notice
    co_await ctx.dma(scratch, scratch + take * 16,
                     static_cast<std::int64_t>(take) * 16);
    chunk.via_dma = true;
    co_await ctx.send(next_core, std::move(chunk));
    Message status =
        co_await ctx.recv(Filter::from_ops(next_core, {OP_ACK, OP_NACK}));
    if (status.op != OP_ACK) co_return false;
    st.llist.resize(st.llist.size() - take);
    co_return true;
  };

  for (;;) {
    Message m = co_await ctx.recv(Filter::ops(
        {OP_LIST_INSERT, OP_LIST_SEARCH, OP_LIST_DELETE, OP_LIST_REQC}));
    switch (m.op) {
      case OP_LIST_REQC: {
        CoreId prev = m.src;
        Message cvm;
        cvm.op = OP_LIST_CV;
        pack_cv(st.cv, cvm);
        co_await ctx.send(prev, std::move(cvm));
        Message chunk = co_await ctx.recv(Filter::from_ops(prev, {OP_LIST_CHUNK}));
        auto snapshot = unpack_cv(chunk);
        while (lags(st.cv, snapshot)) {
          Message sd =
              co_await ctx.recv(Filter::ops({OP_LIST_SEARCH, OP_LIST_DELETE}));
          co_await serve_sd(sd);
        }
        size_t incoming = static_cast<size_t>(chunk.val2);
        bool ok = st.llist.size() + incoming <= static_cast<size_t>(cfg.capacity);
        if (!ok && st.my_id != ns - 1) ok = co_await make_room();
        if (ok && st.llist.size() + incoming > static_cast<size_t>(cfg.capacity))
          ok = false;  // the move freed less than needed
        Message r;
        r.op = ok ? OP_ACK : OP_NACK;
        if (ok)
          for (auto& e : chunk.batch)
            if (e.op == OP_LIST_CHUNK) st.insert_sorted(e.key, e.data);
        co_await ctx.send(prev, std::move(r));
        break;
      }
      case OP_LIST_INSERT: {
        for (;;) {
          if (st.contains(m.key)) {
            Message r;
            r.op = OP_NACK;
            r.val = kNackDup;
            co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
            break;
          }
          bool belongs = st.llist.empty() || st.my_id == ns - 1 ||
                         m.key < st.llist.back().first;
          if (!belongs) {
            co_await ctx.send(next_core, Message(m));
            break;
          }
          if (st.llist.size() < static_cast<size_t>(cfg.capacity)) {
            st.insert_sorted(m.key, m.data);
            Message r;
            r.op = OP_ACK;
            co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
            break;
          }
          if (!co_await make_room()) {
            Message r;
            r.op = OP_NACK;
            r.val = kNackFull;
            co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
            break;
          }
          // room was made; retry with the new local maximum
        }
        break;
      }
      case OP_LIST_SEARCH:
      case OP_LIST_DELETE:
        co_await serve_sd(m);
        break;
    }
  }
}

inline Task<bool> slist_insert(Ctx& ctx, const ListConfig& cfg,
                               std::int64_t key, std::string data) {
  Message m;
  m.op = OP_LIST_INSERT;
  m.cid = ctx.self;
  m.key = key;
  m.data = std::move(data);
  co_await ctx.send(cfg.server_cores[0], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  co_return r.op == OP_ACK;
}

inline Task<BroadcastResult> slist_search(Ctx& ctx, const ListConfig& cfg,
                                          std::int64_t key) {
  return list_broadcast(ctx, cfg, OP_LIST_SEARCH, key);
}
inline Task<BroadcastResult> slist_delete(Ctx& ctx, const ListConfig& cfg,
                                          std::int64_t key) {
  return list_broadcast(ctx, cfg, OP_LIST_DELETE, key);
}

// Audit: strictly increasing keys along server ids, sorted within each.
inline bool slist_order_ok(const std::vector<SListState*>& servers) {
  std::int64_t prev_max = INT64_MIN;
  for (const auto* s : servers) {
    for (size_t i = 0; i + 1 < s->llist.size(); ++i)
      if (s->llist[i].first >= s->llist[i + 1].first) return false;
    if (!s->llist.empty()) {
      if (s->llist.front().first <= prev_max) return false;
      prev_max = s->llist.back().first;
    }
  }
  return true;
}

}  // namespace mpds
