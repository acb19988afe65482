#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpds/sim.hpp"

namespace mpds {

// The mod hash also accepts negative keys. One consistent split of the index
// into (server, bucket): server = idx mod NS, bucket = idx div NS.
enum class HashMode { Mod, Div };

struct DirPlace {
  int server;
  int bucket;
};

inline DirPlace dir_hash(std::int64_t key, int ns, int buckets,
                         HashMode mode = HashMode::Mod,
                         std::int64_t div_k = 8) {
  std::int64_t n = static_cast<std::int64_t>(ns) * buckets;
  std::int64_t base = mode == HashMode::Div ? key / div_k : key;
  std::int64_t idx = ((base % n) + n) % n;
  return {static_cast<int>(idx % ns), static_cast<int>(idx / ns)};
}

struct DirectoryConfig {
  int ns = 2;
  int buckets = 64;
  HashMode hash = HashMode::Mod;
  std::int64_t div_k = 8;
  std::vector<CoreId> server_cores;  // size ns

  CoreId home(std::int64_t key) const {
    return server_cores[dir_hash(key, ns, buckets, hash, div_k).server];
  }
};

struct DirEntry {
  std::int64_t key;
  std::string data;
  Step not_before = 0;  // delay-queue embargo; 0 = immediately removable
};

// Visible server state, owned by the harness so invariants can be audited
// at quiescence.
struct DirServerState {
  std::vector<std::vector<DirEntry>> buckets;
  struct Waiter {
    std::int64_t key;
    CoreId reply_to;
  };
  std::vector<Waiter> parked;  // blocked removals, FIFO

  explicit DirServerState(int nbuckets = 64) : buckets(nbuckets) {}

  DirEntry* find(int bucket, std::int64_t key) {
    for (auto& e : buckets[bucket])
      if (e.key == key) return &e;
    return nullptr;
  }
  bool erase(int bucket, std::int64_t key) {
    auto& chain = buckets[bucket];
    for (auto it = chain.begin(); it != chain.end(); ++it)
      if (it->key == key) {
        chain.erase(it);
        return true;
      }
    return false;
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& c : buckets) n += c.size();
    return n;
  }
};

// Each server processes incoming messages sequentially. A blocked removal
// parks server-side and is fulfilled by the matching insert (or by the
// embargo expiring), so the requester never busy-polls.
inline Proc directory_server(Ctx& ctx, const DirectoryConfig& cfg, int index,
                             DirServerState& st) {
  auto bucket_of = [&, index](std::int64_t key) {
    auto p = dir_hash(key, cfg.ns, cfg.buckets, cfg.hash, cfg.div_k);
    (void)index;
    return p.bucket;
  };

  auto serve_parked = [&]() -> std::vector<Message> {
    std::vector<Message> replies;
    for (auto it = st.parked.begin(); it != st.parked.end();) {
      int b = bucket_of(it->key);
      DirEntry* e = st.find(b, it->key);
      if (e && ctx.now() >= e->not_before) {
        Message r;
        r.op = OP_ACK;
        r.key = it->key;
        r.data = e->data;
        r.dst = it->reply_to;
        st.erase(b, it->key);
        replies.push_back(std::move(r));
        it = st.parked.erase(it);
      } else {
        ++it;
      }
    }
    return replies;
  };

  for (;;) {
    // wake up when the earliest embargo among parked removals expires
    std::optional<Step> deadline;
    for (const auto& w : st.parked) {
      DirEntry* e = st.find(bucket_of(w.key), w.key);
      if (e && e->not_before > ctx.now())
        deadline = deadline ? std::min(*deadline, e->not_before) : e->not_before;
    }

    std::optional<Message> got;
    if (deadline) {
      got = co_await ctx.recv_until(*deadline);
    } else {
      got = co_await ctx.recv();
    }

    if (got) {
      Message& m = *got;
      int b = bucket_of(m.key);
      Message r;
      r.key = m.key;
      switch (m.op) {
        case OP_DIR_INSERT: {
          if (st.find(b, m.key)) {
            r.op = OP_NACK;
          } else {
            Step nb = m.val2 > 0 ? ctx.now() + m.val2 : 0;
            st.buckets[b].push_back({m.key, m.data, nb});
            r.op = OP_ACK;
          }
          co_await ctx.send(m.src, std::move(r));
          break;
        }
        case OP_DIR_SEARCH: {
          if (DirEntry* e = st.find(b, m.key)) {
            r.op = OP_ACK;
            r.data = e->data;
          } else {
            r.op = OP_NACK;
          }
          co_await ctx.send(m.src, std::move(r));
          break;
        }
        case OP_DIR_DELETE: {
          DirEntry* e = st.find(b, m.key);
          if (e && ctx.now() >= e->not_before) {
            r.op = OP_ACK;
            r.data = e->data;
            st.erase(b, m.key);
          } else {
            r.op = OP_NACK;
          }
          co_await ctx.send(m.src, std::move(r));
          break;
        }
        case OP_DIR_BDELETE: {
          DirEntry* e = st.find(b, m.key);
          if (e && ctx.now() >= e->not_before) {
            r.op = OP_ACK;
            r.data = e->data;
            st.erase(b, m.key);
            co_await ctx.send(m.src, std::move(r));
          } else {
            st.parked.push_back({m.key, m.src});
          }
          break;
        }
        default:
          break;  // stray message, dropped
      }
    }

    for (auto& r : serve_parked()) {
      CoreId dst = r.dst;
      co_await ctx.send(dst, std::move(r));
    }
  }
}

// --- client operations --------------------------------------------------------

inline Task<bool> dir_insert(Ctx& ctx, const DirectoryConfig& cfg,
                             std::int64_t key, std::string data,
                             Step delay = 0) {
  CoreId sid = cfg.home(key);
  Message m;
  m.op = OP_DIR_INSERT;
  m.key = key;
  m.data = std::move(data);
  m.cid = ctx.self;
  m.val2 = delay;
  co_await ctx.send(sid, std::move(m));
  Message r = co_await ctx.recv(Filter::from_ops(sid, {OP_ACK, OP_NACK}));
  co_return r.op == OP_ACK;
}

inline Task<std::optional<std::string>> dir_search(Ctx& ctx,
                                                   const DirectoryConfig& cfg,
                                                   std::int64_t key) {
  CoreId sid = cfg.home(key);
  Message m;
  m.op = OP_DIR_SEARCH;
  m.key = key;
  m.cid = ctx.self;
  co_await ctx.send(sid, std::move(m));
  Message r = co_await ctx.recv(Filter::from_ops(sid, {OP_ACK, OP_NACK}));
  if (r.op == OP_ACK) co_return r.data;
  co_return std::nullopt;
}

inline Task<std::optional<std::string>> dir_delete(Ctx& ctx,
                                                   const DirectoryConfig& cfg,
                                                   std::int64_t key) {
  CoreId sid = cfg.home(key);
  Message m;
  m.op = OP_DIR_DELETE;
  m.key = key;
  m.cid = ctx.self;
  co_await ctx.send(sid, std::move(m));
  Message r = co_await ctx.recv(Filter::from_ops(sid, {OP_ACK, OP_NACK}));
  if (r.op == OP_ACK) co_return r.data;
  co_return std::nullopt;
}

inline Task<std::string> block_dir_delete(Ctx& ctx, const DirectoryConfig& cfg,
                                          std::int64_t key) {
  CoreId sid = cfg.home(key);
  Message m;
  m.op = OP_DIR_BDELETE;
  m.key = key;
  m.cid = ctx.self;
  co_await ctx.send(sid, std::move(m));
  Message r = co_await ctx.recv(Filter::from_ops(sid, {OP_ACK}));
  co_return r.data;
}

// Audit: every stored key lives exactly at its home server and bucket.
inline bool dir_residency_ok(const DirectoryConfig& cfg,
                             const std::vector<DirServerState*>& servers) {
  for (int s = 0; s < cfg.ns; ++s) {
    for (int b = 0; b < cfg.buckets; ++b) {
      for (const auto& e : servers[s]->buckets[b]) {
        auto p = dir_hash(e.key, cfg.ns, cfg.buckets, cfg.hash, cfg.div_k);
        if (p.server != s || p.bucket != b) return false;
      }
    }
  }
  return true;
}

}  // namespace mpds
