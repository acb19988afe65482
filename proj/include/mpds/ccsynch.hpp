#pragma once

#include <map>
#include <vector>

#include "mpds/sim.hpp"

namespace mpds {

// Combining for partially cache-coherent islands: clients announce requests
// in a shared list whose nodes double as a queue lock. The lock holder (the
// combiner) batches up to h pending requests per destination server, sends
// them, distributes the replies, and hands the combiner role to the next
// node's owner. Cross-island traffic stays message-only.

struct CcNodeField {
  enum : int { Wait = 0, Completed, Next, ReqOp, ReqVal, Ret, Id, Sid, Count_ };
};

struct CcSynchIsland {
  int island = 0;
  int tail_cell = -1;            // holds a node index + 1 (0 = null)
  std::vector<int> node_base;    // cell base per node

  int cell(int node, int field) const { return node_base[node] + field; }
};

// One node per client plus the initial dummy.
inline CcSynchIsland ccsynch_setup(Sim& sim, int island, int nclients) {
  CcSynchIsland isl;
  isl.island = island;
  for (int n = 0; n < nclients + 1; ++n) {
    int base = -1;
    for (int f = 0; f < CcNodeField::Count_; ++f) {
      int c = sim.alloc_cell(island, 0);
      if (f == 0) base = c;
    }
    isl.node_base.push_back(base);
  }
  // the last node is the initial dummy: unlocked, not completed
  isl.tail_cell = sim.alloc_cell(island, nclients + 1);  // dummy index + 1
  return isl;
}

inline int ccsynch_client_node(const CcSynchIsland& isl, int client_index) {
  return client_index;  // node i initially belongs to client i
}

// Executes one request through the island's combining instance. my_node is
// the client's current node index and rotates on every call.
inline Task<Value> ccsynch_execute(Ctx& ctx, const CcSynchIsland& isl,
                                   int& my_node, CoreId dest, int op, Value val,
                                   int h = 64) {
  using F = CcNodeField;
  // publish a fresh dummy, adopt the previous one and announce the request
  co_await ctx.cell_write(isl.cell(my_node, F::Wait), 1);
  co_await ctx.cell_write(isl.cell(my_node, F::Next), 0);
  co_await ctx.cell_write(isl.cell(my_node, F::Completed), 0);
  int next_node = my_node;
  int cur = static_cast<int>(
                co_await ctx.cell_swap(isl.tail_cell, next_node + 1)) -
            1;
  co_await ctx.cell_write(isl.cell(cur, F::ReqOp), op);
  co_await ctx.cell_write(isl.cell(cur, F::ReqVal), val);
  co_await ctx.cell_write(isl.cell(cur, F::Sid), dest);
  co_await ctx.cell_write(isl.cell(cur, F::Id), ctx.self);
  co_await ctx.cell_write(isl.cell(cur, F::Next), next_node + 1);
  my_node = cur;

  co_await ctx.cell_wait(isl.cell(cur, F::Wait), 0);  // spin until unlocked
  if (co_await ctx.cell_read(isl.cell(cur, F::Completed)) == 1)
    co_return co_await ctx.cell_read(isl.cell(cur, F::Ret));

  // we are the combiner
  std::map<CoreId, std::vector<Message>> outbuf;
  int counter = 0;
  int tmp = cur;
  while (counter < h) {
    int nxt = static_cast<int>(co_await ctx.cell_read(isl.cell(tmp, F::Next)));
    if (nxt == 0) break;
    Message sub;
    sub.op = static_cast<int>(co_await ctx.cell_read(isl.cell(tmp, F::ReqOp)));
    sub.val = co_await ctx.cell_read(isl.cell(tmp, F::ReqVal));
    sub.cid = co_await ctx.cell_read(isl.cell(tmp, F::Id));
    CoreId sid =
        static_cast<CoreId>(co_await ctx.cell_read(isl.cell(tmp, F::Sid)));
    outbuf[sid].push_back(std::move(sub));
    counter++;
    tmp = nxt - 1;
  }

  std::map<std::int64_t, Value> results;  // by announcing core id
  for (auto& [sid, subs] : outbuf) {
    Message b;
    b.op = OP_BATCH_OUT;
    b.val = static_cast<Value>(subs.size());
    b.batch = std::move(subs);
    co_await ctx.send(sid, std::move(b));
  }
  for (size_t i = 0; i < outbuf.size(); ++i) {
    Message in = co_await ctx.recv(Filter::ops({OP_BATCH_IN}));
    for (const Message& sub : in.batch)
      results[sub.cid] = sub.op == OP_ACK ? sub.val : kEmpty;
  }

  tmp = cur;
  for (int i = 0; i < counter; ++i) {
    int nxt = static_cast<int>(co_await ctx.cell_read(isl.cell(tmp, F::Next)));
    Value id = co_await ctx.cell_read(isl.cell(tmp, F::Id));
    co_await ctx.cell_write(isl.cell(tmp, F::Ret), results[id]);
    co_await ctx.cell_write(isl.cell(tmp, F::Completed), 1);
    co_await ctx.cell_write(isl.cell(tmp, F::Wait), 0);
    tmp = nxt - 1;
  }
  co_await ctx.cell_write(isl.cell(tmp, F::Wait), 0);  // hand over the role

  co_return co_await ctx.cell_read(isl.cell(cur, F::Ret));
}

}  // namespace mpds
