#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpds/ccsynch.hpp"
#include "mpds/dir_structs.hpp"
#include "mpds/directory.hpp"
#include "mpds/hierarchy.hpp"
#include "mpds/history.hpp"
#include "mpds/linearize.hpp"
#include "mpds/lists.hpp"
#include "mpds/syncprims.hpp"
#include "mpds/token_deque.hpp"
#include "mpds/token_queue.hpp"
#include "mpds/token_stack.hpp"

namespace mpds {

// Workload shape: clients alternate their structure's operation pair with a
// random amount of local work (dummy scheduler steps) between consecutive
// requests.
struct WorkloadConfig {
  std::string algo = "cqueue";
  int islands = 1;
  int cores_per_island = 8;
  std::int64_t ops = 100;  // N, total across clients (kept even)
  std::int64_t work = 0;   // W, local-work bound per op
  std::uint64_t seed = 1;
  int capacity = 64;
  bool hier = false;
  bool elim = false;
  bool dynamic = false;  // token structures
  int servers = 4;       // NS for multi-server algorithms
  Step master_period = 8;
  int master_cap = 16;
  Step max_steps = 200'000'000;
};

struct MetricsRecord {
  std::string algo;
  int islands = 0;
  int cores = 0;
  std::int64_t ops = 0;        // completed operations (m)
  std::int64_t work = 0;
  std::uint64_t seed = 0;
  std::int64_t total_msgs = 0;
  std::int64_t max_server_msgs = 0;
  Step steps = 0;
  double throughput = 0.0;  // ops per scheduler step
  double sf = 0.0;          // max over servers of msg_s / m
  std::vector<std::pair<std::string, std::int64_t>> server_msgs;

  double sf_of(const std::string& role) const {
    for (const auto& [name, msgs] : server_msgs)
      if (name == role)
        return ops > 0 ? static_cast<double>(msgs) / static_cast<double>(ops)
                       : 0.0;
    return 0.0;
  }
};

struct RunOutput {
  MetricsRecord metrics;
  History history;
  std::string spec_name;  // matching sequential spec, empty if none
  bool deadlocked = false;
  bool truncated = false;
  std::string diagnostic;
  std::vector<Event> log;  // full event log of the run
};

inline const std::vector<std::string>& bench_algos() {
  static const std::vector<std::string> algos = {
      "cstack", "estack", "hstack", "tstack",    "dstack", "cqueue",
      "hqueue", "dqueue", "tqueue", "ddeque",    "tdeque", "ulist",
      "ulist-alt", "slist", "atomics", "rwmon"};
  return algos;
}

namespace bench_detail {

struct Placement {
  std::vector<CoreId> masters;  // one per island when hierarchical
  std::vector<CoreId> servers;
  std::vector<CoreId> clients;
};

inline Placement plan(const Topology& topo, bool hier, int nservers) {
  Placement p;
  std::vector<bool> taken(topo.total(), false);
  if (hier) {
    for (int i = 0; i < topo.islands; ++i) {
      CoreId c = topo.core_of(i, 0);
      p.masters.push_back(c);
      taken[c] = true;
    }
  }
  int island = 0, placed = 0;
  while (placed < nservers) {
    bool progressed = false;
    for (int i = 0; i < topo.islands && placed < nservers; ++i) {
      for (int s = 0; s < topo.cores_per_island; ++s) {
        CoreId c = topo.core_of(i, s);
        if (!taken[c]) {
          taken[c] = true;
          p.servers.push_back(c);
          placed++;
          progressed = true;
          break;
        }
      }
    }
    if (!progressed) throw std::invalid_argument("not enough cores for servers");
    (void)island;
  }
  for (CoreId c = 0; c < topo.total(); ++c)
    if (!taken[c]) p.clients.push_back(c);
  if (p.clients.empty())
    throw std::invalid_argument("no cores left for clients");
  return p;
}

inline std::int64_t ops_for_client(std::int64_t total, int nclients, int idx) {
  std::int64_t base = total / nclients;
  std::int64_t extra = total % nclients;
  // keep per-client counts even so clients run complete op pairs
  std::int64_t n = base + (idx < extra ? 1 : 0);
  return n - (n % 2);
}

// Shared pieces assembled per algorithm.
struct Rig {
  std::unique_ptr<Sim> sim;
  Placement place;
  History history;
  std::vector<std::pair<std::string, CoreId>> server_roles;
  std::int64_t completed = 0;

  // structure state lives here so audits can look at it after the run
  CentralState central;
  StackSyncState stack_sync;
  QueueSyncState queue_sync;
  DequeSyncState deque_sync;
  SyncQueueState syncq;
  DirectoryConfig dir_cfg;
  std::vector<std::unique_ptr<DirServerState>> dirs;
  TokenStackConfig tstack_cfg;
  std::vector<std::unique_ptr<TokenStackState>> tstacks;
  TokenQueueConfig tqueue_cfg;
  std::vector<std::unique_ptr<TokenQueueState>> tqueues;
  TokenDequeConfig tdeque_cfg;
  std::vector<std::unique_ptr<TokenDequeState>> tdeques;
  TokenAudit token_audit;
  ListConfig list_cfg;
  std::vector<std::unique_ptr<UListState>> ulists;
  std::vector<std::unique_ptr<SListState>> slists;
  PrimManagerState prims;
  MasterConfig master_cfg;
  std::vector<std::unique_ptr<MasterState>> masters;
};

inline void spawn_masters(Rig& rig, const WorkloadConfig& cfg,
                          MasterMode mode, CoreId server, bool elim,
                          bool split_queue) {
  rig.master_cfg.server = server;
  rig.master_cfg.period = cfg.master_period;
  rig.master_cfg.batch_cap = cfg.master_cap;
  rig.master_cfg.elim = elim;
  rig.master_cfg.split_queue_batches = split_queue;
  rig.master_cfg.mode = mode;
  for (CoreId mc : rig.place.masters) {
    rig.masters.push_back(std::make_unique<MasterState>());
    MasterState& ms = *rig.masters.back();
    rig.sim->spawn_daemon(mc, "master" + std::to_string(mc),
                          [&rig, &ms](Ctx& ctx) {
                            return island_master(ctx, rig.master_cfg, ms);
                          });
  }
}

inline CoreId master_of(const Rig& rig, const Topology& topo, CoreId client) {
  return rig.place.masters[topo.island_of(client)];
}

// --- hierarchical directory-structure clients ------------------------------------

inline Task<bool> dstack_push_h(Ctx& ctx, CoreId master,
                                const DirectoryConfig& dir, Value v) {
  Message m;
  m.op = OP_PUSH;
  m.val = v;
  m.cid = ctx.self;
  co_await ctx.send(master, std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  if (r.val2 == 1) co_return true;  // eliminated at the master
  co_return co_await dir_insert(ctx, dir, r.key, enc(v));
}

inline Task<Value> dstack_pop_h(Ctx& ctx, CoreId master,
                                const DirectoryConfig& dir) {
  Message m;
  m.op = OP_POP;
  m.cid = ctx.self;
  co_await ctx.send(master, std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  if (r.val2 == 1) co_return r.val;  // eliminated: the paired push's value
  if (r.key == -1) co_return kEmpty;
  for (;;) {
    auto got = co_await dir_delete(ctx, dir, r.key);
    if (got) co_return dec(*got);
  }
}

inline Task<bool> dqueue_enqueue_h(Ctx& ctx, CoreId master,
                                   const DirectoryConfig& dir, Value v) {
  Message m;
  m.op = OP_ENQ;
  m.cid = ctx.self;
  co_await ctx.send(master, std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  co_return co_await dir_insert(ctx, dir, r.key, enc(v));
}

inline Task<Value> dqueue_dequeue_h(Ctx& ctx, CoreId master,
                                    const DirectoryConfig& dir) {
  Message m;
  m.op = OP_DEQ;
  m.cid = ctx.self;
  co_await ctx.send(master, std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  if (r.op == OP_NACK) co_return kEmpty;
  std::string data = co_await block_dir_delete(ctx, dir, r.key);
  co_return dec(data);
}

}  // namespace bench_detail

// Runs one benchmark workload to quiescence and reports metrics plus the
// recorded invocation/response history.
inline RunOutput run_workload(const WorkloadConfig& cfg) {
  using namespace bench_detail;
  const std::string& a = cfg.algo;
  bool known = false;
  for (const auto& name : bench_algos()) known = known || name == a;
  if (!known) throw std::invalid_argument("unknown algorithm: " + cfg.algo);

  Topology topo{cfg.islands, cfg.cores_per_island};
  RunOutput out;
  Rig rig;
  rig.sim = std::make_unique<Sim>(topo);
  Sim& sim = *rig.sim;

  const bool is_stack = a == "cstack" || a == "estack" || a == "hstack" ||
                        a == "tstack" || a == "dstack";
  const bool is_queue = a == "cqueue" || a == "hqueue" || a == "dqueue" ||
                        a == "tqueue";
  const bool is_deque = a == "ddeque" || a == "tdeque";
  const bool is_list = a == "ulist" || a == "ulist-alt" || a == "slist";
  const bool central = a == "cstack" || a == "cqueue" || a == "estack" ||
                       a == "hstack" || a == "hqueue";
  const bool hier = cfg.hier || a == "estack" || a == "hstack" ||
                    a == "hqueue";
  const bool elim = cfg.elim || a == "estack";

  int nservers = 1;
  if (a == "dstack" || a == "dqueue" || a == "ddeque") nservers = 1 + cfg.servers;
  else if (a == "tstack" || a == "tqueue" || a == "tdeque" || is_list)
    nservers = cfg.servers;

  rig.place = plan(topo, hier, nservers);
  const auto& servers = rig.place.servers;

  // --- spawn the structure's server processes --------------------------------

  if (central) {
    rig.server_roles.push_back({"server", servers[0]});
    sim.spawn_daemon(servers[0], "server", [&rig](Ctx& ctx) {
      return central_server(ctx, rig.central);
    });
    if (hier)
      spawn_masters(rig, cfg, MasterMode::Batch, servers[0], elim,
                    /*split_queue=*/a == "hqueue");
  } else if (a == "dstack" || a == "dqueue" || a == "ddeque") {
    CoreId sync = servers[0];
    rig.server_roles.push_back({"sync", sync});
    rig.dir_cfg.ns = cfg.servers;
    rig.dir_cfg.buckets = 64;
    for (int i = 0; i < cfg.servers; ++i) {
      rig.dir_cfg.server_cores.push_back(servers[1 + i]);
      rig.server_roles.push_back({"dir" + std::to_string(i), servers[1 + i]});
    }
    if (a == "dstack") {
      sim.spawn_daemon(sync, "sync", [&rig](Ctx& ctx) {
        return stack_synchronizer(ctx, rig.stack_sync);
      });
      if (hier) spawn_masters(rig, cfg, MasterMode::CombineStack, sync, elim, false);
    } else if (a == "dqueue") {
      sim.spawn_daemon(sync, "sync", [&rig](Ctx& ctx) {
        return queue_synchronizer(ctx, rig.queue_sync);
      });
      if (hier) spawn_masters(rig, cfg, MasterMode::CombineQueue, sync, false, false);
    } else {
      sim.spawn_daemon(sync, "sync", [&rig](Ctx& ctx) {
        return deque_synchronizer(ctx, rig.deque_sync, rig.dir_cfg);
      });
    }
    for (int i = 0; i < cfg.servers; ++i) {
      rig.dirs.push_back(std::make_unique<DirServerState>(rig.dir_cfg.buckets));
      DirServerState& st = *rig.dirs.back();
      sim.spawn_daemon(rig.dir_cfg.server_cores[i], "dir" + std::to_string(i),
                       [&rig, i, &st](Ctx& ctx) {
                         return directory_server(ctx, rig.dir_cfg, i, st);
                       });
    }
  } else if (a == "tstack") {
    rig.tstack_cfg.ns = cfg.servers;
    rig.tstack_cfg.capacity = cfg.capacity;
    rig.tstack_cfg.server_cores = servers;
    for (int i = 0; i < cfg.servers; ++i) {
      rig.server_roles.push_back({"ts" + std::to_string(i), servers[i]});
      rig.tstacks.push_back(std::make_unique<TokenStackState>());
      rig.tstacks.back()->my_sid = i;
      TokenStackState& st = *rig.tstacks.back();
      sim.spawn_daemon(servers[i], "ts" + std::to_string(i),
                       [&rig, &st](Ctx& ctx) {
                         return token_stack_server(ctx, rig.tstack_cfg, st,
                                                   &rig.token_audit);
                       });
    }
  } else if (a == "tqueue") {
    rig.tqueue_cfg.ns = cfg.servers;
    rig.tqueue_cfg.capacity = cfg.capacity;
    rig.tqueue_cfg.dynamic = cfg.dynamic;
    rig.tqueue_cfg.server_cores = servers;
    for (int i = 0; i < cfg.servers; ++i) {
      rig.server_roles.push_back({"ts" + std::to_string(i), servers[i]});
      rig.tqueues.push_back(std::make_unique<TokenQueueState>());
      rig.tqueues.back()->my_sid = i;
      rig.tqueues.back()->has_head = rig.tqueues.back()->has_tail = (i == 0);
      TokenQueueState& st = *rig.tqueues.back();
      sim.spawn_daemon(servers[i], "ts" + std::to_string(i),
                       [&rig, &st](Ctx& ctx) {
                         return token_queue_server(ctx, rig.tqueue_cfg, st,
                                                   &rig.token_audit);
                       });
    }
  } else if (a == "tdeque") {
    rig.tdeque_cfg.ns = cfg.servers;
    rig.tdeque_cfg.capacity = cfg.capacity;
    rig.tdeque_cfg.dynamic = cfg.dynamic;
    rig.tdeque_cfg.server_cores = servers;
    for (int i = 0; i < cfg.servers; ++i) {
      rig.server_roles.push_back({"ts" + std::to_string(i), servers[i]});
      rig.tdeques.push_back(std::make_unique<TokenDequeState>());
      rig.tdeques.back()->my_sid = i;
      rig.tdeques.back()->has_head = rig.tdeques.back()->has_tail = (i == 0);
      TokenDequeState& st = *rig.tdeques.back();
      sim.spawn_daemon(servers[i], "ts" + std::to_string(i),
                       [&rig, &st](Ctx& ctx) {
                         return token_deque_server(ctx, rig.tdeque_cfg, st,
                                                   &rig.token_audit);
                       });
    }
  } else if (is_list) {
    rig.list_cfg.ns = cfg.servers;
    rig.list_cfg.capacity = cfg.capacity;
    rig.list_cfg.server_cores = servers;
    for (int i = 0; i < cfg.servers; ++i) {
      rig.server_roles.push_back({"ls" + std::to_string(i), servers[i]});
      if (a == "slist") {
        rig.slists.push_back(std::make_unique<SListState>());
        rig.slists.back()->my_id = i;
        SListState& st = *rig.slists.back();
        sim.spawn_daemon(servers[i], "ls" + std::to_string(i),
                         [&rig, &st](Ctx& ctx) {
                           return slist_server(ctx, rig.list_cfg, st);
                         });
      } else {
        rig.ulists.push_back(std::make_unique<UListState>());
        rig.ulists.back()->my_id = i;
        UListState& st = *rig.ulists.back();
        if (a == "ulist") {
          sim.spawn_daemon(servers[i], "ls" + std::to_string(i),
                           [&rig, &st](Ctx& ctx) {
                             return ulist_server(ctx, rig.list_cfg, st);
                           });
        } else {
          sim.spawn_daemon(servers[i], "ls" + std::to_string(i),
                           [&rig, &st](Ctx& ctx) {
                             return ulist_alt_server(ctx, rig.list_cfg, st);
                           });
        }
      }
    }
  } else {  // atomics, rwmon
    rig.server_roles.push_back({"mgr", servers[0]});
    sim.spawn_daemon(servers[0], "mgr", [&rig](Ctx& ctx) {
      return prim_manager(ctx, rig.prims);
    });
  }

  // --- spawn clients ----------------------------------------------------------

  const int nclients = static_cast<int>(rig.place.clients.size());
  std::int64_t total_ops = cfg.ops - (cfg.ops % 2);
  for (int ci = 0; ci < nclients; ++ci) {
    CoreId core = rig.place.clients[ci];
    std::int64_t my_ops = ops_for_client(total_ops, nclients, ci);
    if (my_ops == 0) continue;
    CoreId mast = hier ? master_of(rig, topo, core) : -1;

    sim.spawn(core, "client" + std::to_string(ci), [&rig, &cfg, a, ci, core,
                                                    my_ops, mast, is_stack,
                                                    is_queue, is_deque,
                                                    central](Ctx& ctx) -> Proc {
      int tsid = 0, hsid = 0;  // token-structure lazy server ids
      for (std::int64_t i = 0; i < my_ops; ++i) {
        if (cfg.work > 0) co_await ctx.work(ctx.rand(0, cfg.work));
        bool insert_phase = i % 2 == 0;
        Value v = static_cast<Value>(ci) * 1'000'000 + i;

        if (is_stack) {
          if (insert_phase) {
            int t = rig.history.invoke(ci, "push", v);
            bool ok;
            if (central)
              ok = co_await central_push(ctx, mast >= 0 ? mast
                                                        : rig.place.servers[0],
                                         v);
            else if (a == "tstack")
              ok = co_await tstack_push(ctx, rig.tstack_cfg, tsid, v);
            else if (mast >= 0)
              ok = co_await dstack_push_h(ctx, mast, rig.dir_cfg, v);
            else
              ok = co_await dstack_push(ctx, rig.place.servers[0], rig.dir_cfg,
                                        v);
            rig.history.respond(t, ok ? kAckVal : kNackVal);
          } else {
            int t = rig.history.invoke(ci, "pop");
            Value got;
            if (central)
              got = co_await central_pop(
                  ctx, mast >= 0 ? mast : rig.place.servers[0]);
            else if (a == "tstack")
              got = co_await tstack_pop(ctx, rig.tstack_cfg, tsid);
            else if (mast >= 0)
              got = co_await dstack_pop_h(ctx, mast, rig.dir_cfg);
            else
              got = co_await dstack_pop(ctx, rig.place.servers[0], rig.dir_cfg);
            rig.history.respond(t, got);
          }
        } else if (is_queue) {
          if (insert_phase) {
            int t = rig.history.invoke(ci, "enq", v);
            bool ok;
            if (central)
              ok = co_await central_enqueue(
                  ctx, mast >= 0 ? mast : rig.place.servers[0], v);
            else if (a == "tqueue")
              ok = co_await tqueue_enqueue(ctx, rig.tqueue_cfg, tsid, v);
            else if (mast >= 0)
              ok = co_await dqueue_enqueue_h(ctx, mast, rig.dir_cfg, v);
            else
              ok = co_await dqueue_enqueue(ctx, rig.place.servers[0],
                                           rig.dir_cfg, v);
            rig.history.respond(t, ok ? kAckVal : kNackVal);
          } else {
            int t = rig.history.invoke(ci, "deq");
            Value got;
            if (central)
              got = co_await central_dequeue(
                  ctx, mast >= 0 ? mast : rig.place.servers[0]);
            else if (a == "tqueue")
              got = co_await tqueue_dequeue(ctx, rig.tqueue_cfg, hsid);
            else if (mast >= 0)
              got = co_await dqueue_dequeue_h(ctx, mast, rig.dir_cfg);
            else
              got = co_await dqueue_dequeue(ctx, rig.place.servers[0],
                                            rig.dir_cfg);
            rig.history.respond(t, got);
          }
        } else if (is_deque) {
          bool tail = ctx.rand(0, 1) == 0;
          if (insert_phase) {
            int t = rig.history.invoke(ci, tail ? "enq_t" : "enq_h", v);
            bool ok;
            if (a == "tdeque")
              ok = co_await tdeque_enqueue(ctx, rig.tdeque_cfg,
                                           tail ? tsid : hsid, tail, v);
            else
              ok = co_await ddeque_enqueue(ctx, rig.place.servers[0],
                                           rig.dir_cfg, tail, v);
            rig.history.respond(t, ok ? kAckVal : kNackVal);
          } else {
            int t = rig.history.invoke(ci, tail ? "deq_t" : "deq_h");
            Value got;
            if (a == "tdeque")
              got = co_await tdeque_dequeue(ctx, rig.tdeque_cfg,
                                            tail ? tsid : hsid, tail);
            else
              got = co_await ddeque_dequeue(ctx, rig.place.servers[0],
                                            rig.dir_cfg, tail);
            rig.history.respond(t, got);
          }
        } else if (a == "ulist" || a == "ulist-alt" || a == "slist") {
          std::int64_t k = ctx.rand(0, 31);
          int kind = static_cast<int>(i % 4);
          if (kind == 0 || kind == 2) {
            int t = rig.history.invoke(ci, "insert", k);
            bool ok;
            if (a == "ulist")
              ok = co_await ulist_insert(ctx, rig.list_cfg, k, enc(k));
            else if (a == "ulist-alt")
              ok = co_await ulist_alt_insert(ctx, rig.list_cfg, k, enc(k));
            else
              ok = co_await slist_insert(ctx, rig.list_cfg, k, enc(k));
            rig.history.respond(t, ok ? 1 : 0);
          } else if (kind == 1) {
            int t = rig.history.invoke(ci, "delete", k);
            auto r = a == "slist" ? co_await slist_delete(ctx, rig.list_cfg, k)
                                  : co_await ulist_delete(ctx, rig.list_cfg, k);
            rig.history.respond(t, r.found ? 1 : 0);
          } else {
            int t = rig.history.invoke(ci, "search", k);
            auto r = a == "slist" ? co_await slist_search(ctx, rig.list_cfg, k)
                                  : co_await ulist_search(ctx, rig.list_cfg, k);
            rig.history.respond(t, r.found ? 1 : 0);
          }
        } else if (a == "atomics") {
          CoreId mgr = rig.place.servers[0];
          switch (ctx.rand(0, 4)) {
            case 0: {
              int t = rig.history.invoke(ci, "rd");
              rig.history.respond(t, co_await atomic_read(ctx, mgr, 0));
              break;
            }
            case 1: {
              Value w = ctx.rand(0, 7);
              int t = rig.history.invoke(ci, "wr", w);
              co_await atomic_write(ctx, mgr, 0, w);
              rig.history.respond(t, kAckVal);
              break;
            }
            case 2: {
              int t = rig.history.invoke(ci, "faa", 1);
              rig.history.respond(t, co_await atomic_faa(ctx, mgr, 0, 1));
              break;
            }
            case 3: {
              Value w = ctx.rand(0, 7);
              int t = rig.history.invoke(ci, "swp", w);
              rig.history.respond(t, co_await atomic_swap(ctx, mgr, 0, w));
              break;
            }
            default: {
              Value e = ctx.rand(0, 7), n = ctx.rand(0, 7);
              int t = rig.history.invoke(ci, "cas", e, n);
              rig.history.respond(t, co_await atomic_cas(ctx, mgr, 0, e, n));
              break;
            }
          }
        } else {  // rwmon
          CoreId mgr = rig.place.servers[0];
          if (ctx.rand(0, 3) == 0) {
            co_await rw_write_lock(ctx, mgr, 1);
            Value w = ctx.rand(0, 7);
            int t = rig.history.invoke(ci, "wr", w);
            co_await atomic_write(ctx, mgr, 0, w);
            rig.history.respond(t, kAckVal);
            co_await rw_write_unlock(ctx, mgr, 1);
          } else {
            co_await rw_read_lock(ctx, mgr, 1);
            int t = rig.history.invoke(ci, "rd");
            rig.history.respond(t, co_await atomic_read(ctx, mgr, 0));
            co_await rw_read_unlock(ctx, mgr, 1);
          }
        }
        rig.completed++;
      }
    });
  }

  // --- run and collect ---------------------------------------------------------

  SchedulerConfig sched;
  sched.seed = cfg.seed;
  sched.mode = SchedMode::SeededRandomFair;
  sched.max_steps = cfg.max_steps;
  RunResult res = sim.run_until_quiescent(sched);

  out.deadlocked = res.deadlocked();
  out.truncated = res.truncated;
  if (out.deadlocked || out.truncated) {
    std::string tail;
    const auto& log = sim.log();
    size_t from = log.size() > 20 ? log.size() - 20 : 0;
    for (size_t i = from; i < log.size(); ++i)
      tail += std::to_string(log[i].step) + " " + ev_name(log[i].kind) + " " +
              op_name(log[i].op) + "\n";
    out.diagnostic = out.deadlocked ? "blocked clients:" : "truncated;";
    for (const auto& b : res.blocked) out.diagnostic += " " + b;
    out.diagnostic += "\nlog tail:\n" + tail;
  }

  MetricsRecord& m = out.metrics;
  m.algo = cfg.algo;
  m.islands = cfg.islands;
  m.cores = cfg.cores_per_island;
  m.ops = rig.completed;
  m.work = cfg.work;
  m.seed = cfg.seed;
  m.total_msgs = sim.total_deliveries();
  m.steps = res.steps;
  m.throughput = m.steps > 0 ? static_cast<double>(m.ops) /
                                   static_cast<double>(m.steps)
                             : 0.0;
  for (const auto& [role, core] : rig.server_roles) {
    std::int64_t msgs = sim.deliveries_to(core);
    m.server_msgs.push_back({role, msgs});
    m.max_server_msgs = std::max(m.max_server_msgs, msgs);
  }
  m.sf = m.ops > 0 ? static_cast<double>(m.max_server_msgs) /
                         static_cast<double>(m.ops)
                   : 0.0;

  out.history = std::move(rig.history);
  out.log = sim.log();
  if (is_stack) out.spec_name = "stack";
  else if (is_queue) out.spec_name = "queue";
  else if (is_deque) out.spec_name = "deque";
  else if (is_list) out.spec_name = "set";
  else out.spec_name = "register";
  return out;
}

// CSV: one row per run; appending preserves prior rows and only writes the
// header into a fresh file.
inline void emit_csv(const MetricsRecord& m, const std::string& path) {
  bool fresh = true;
  if (std::FILE* probe = std::fopen(path.c_str(), "r")) {
    fresh = std::fgetc(probe) == EOF;
    std::fclose(probe);
  }
  std::FILE* f = std::fopen(path.c_str(), "a");
  if (!f) throw std::runtime_error("cannot open csv: " + path);
  if (fresh)
    std::fputs("algo,m,c,N,W,seed,total_msgs,max_server_msgs,throughput,sf\n",
               f);
  std::fprintf(f, "%s,%d,%d,%lld,%lld,%llu,%lld,%lld,%.6f,%.6f\n",
               m.algo.c_str(), m.islands, m.cores,
               static_cast<long long>(m.ops), static_cast<long long>(m.work),
               static_cast<unsigned long long>(m.seed),
               static_cast<long long>(m.total_msgs),
               static_cast<long long>(m.max_server_msgs), m.throughput, m.sf);
  std::fclose(f);
}

}  // namespace mpds
