#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mpds {

using CoreId = int;
using Step = std::int64_t;
using Value = std::int64_t;

// Machine layout: m islands of c cores each, core ids 0..m*c-1.
struct Topology {
  int islands = 1;
  int cores_per_island = 1;

  int total() const { return islands * cores_per_island; }
  int island_of(CoreId core) const { return core / cores_per_island; }
  CoreId core_of(int island, int slot) const {
    return island * cores_per_island + slot;
  }
  bool valid(CoreId core) const { return core >= 0 && core < total(); }
};

// Operation codes share one numbering so a message filter can be a bitmask
// and the event log can print names.
enum Op : int {
  OP_NONE = 0,
  OP_ACK,
  OP_NACK,
  OP_BATCH_OUT,  // master -> server, packed requests
  OP_BATCH_IN,   // server -> master, packed replies
  OP_DMA_DONE,

  // directory (distributed hash table)
  OP_DIR_INSERT,
  OP_DIR_SEARCH,
  OP_DIR_DELETE,
  OP_DIR_BDELETE,

  // directory-based structure synchronizers
  OP_PUSH,
  OP_POP,
  OP_ENQ,
  OP_DEQ,
  OP_ENQ_T,
  OP_DEQ_T,
  OP_ENQ_H,
  OP_DEQ_H,
  OP_SQ_ENQ,
  OP_SQ_DEQ,
  OP_DLQ_ENQ,
  OP_DLQ_DEQ,
  OP_COMBINE_PUSH,    // val = count of pushes
  OP_COMBINE_POP,     // val = count of pops
  OP_COMBINE_ENQDEQ,  // val = enq count, val2 = deq count

  // distributed lists
  OP_LIST_INSERT,
  OP_LIST_SEARCH,
  OP_LIST_DELETE,
  OP_LIST_REQC,
  OP_LIST_CV,
  OP_LIST_CHUNK,

  // manager-based primitives
  OP_PRIM_READ,
  OP_PRIM_WRITE,
  OP_PRIM_FAA,
  OP_PRIM_SWAP,
  OP_PRIM_CAS,
  OP_RW_RLOCK,
  OP_RW_RUNLOCK,
  OP_RW_WLOCK,
  OP_RW_WUNLOCK,
  OP_RW_TRYLOCK,

  OP_COUNT_
};

static_assert(OP_COUNT_ <= 64, "op codes must fit a filter bitmask");

const char* op_name(int op);

// Token markers carried in the tk field.
enum Token : std::int64_t {
  TK_NONE = 0,
  TK_TOKEN = 1,  // single-token protocols
  TK_TAIL = 2,
  TK_HEAD = 3,
};

// One wire envelope. Protocols use the subset of fields their layout names;
// unused fields ride along as zero. A batch envelope carries sub-envelopes
// and its size in abstract units grows with them.
struct Message {
  CoreId src = -1;
  CoreId dst = -1;
  int op = OP_NONE;
  std::int64_t key = 0;
  Value val = 0;
  Value val2 = 0;
  std::int64_t cid = -1;
  std::int64_t sid = -1;
  std::int64_t tk = TK_NONE;
  bool flag = false;  // mloop and similar one-bit fields
  std::string data;
  std::vector<Message> batch;
  bool via_dma = false;
  std::int64_t seq = -1;  // stamped by the simulator on send

  int size_units() const {
    int u = 1;
    for (const auto& m : batch) u += m.size_units();
    return u;
  }
};

// Cost and behaviour knobs. The message-cost parameters feed metrics only.
struct Config {
  int mms = 4;           // max message size, abstract units
  int cost_msg = 1;      // C_M, per-message setup cost
  int cost_dma = 4;      // C_D, per-DMA setup cost
  int dma_burst = 8;     // bytes copied per engine step
  int max_delay = 3;     // delivery delay drawn from [1, max_delay]
  int mailbox_bound = 0; // >0 enables the overflow counter (units)
};

enum class SchedMode {
  RoundRobin,       // fixed order, delay 1
  SeededRandomFair, // per-round shuffle, delay in [1, max_delay]
};

struct SchedulerConfig {
  std::uint64_t seed = 1;
  SchedMode mode = SchedMode::SeededRandomFair;
  Step max_steps = 50'000'000;
};

inline const char* op_name(int op) {
  switch (op) {
    case OP_NONE: return "none";
    case OP_ACK: return "ack";
    case OP_NACK: return "nack";
    case OP_BATCH_OUT: return "batch_out";
    case OP_BATCH_IN: return "batch_in";
    case OP_DMA_DONE: return "dma_done";
    case OP_DIR_INSERT: return "dir_insert";
    case OP_DIR_SEARCH: return "dir_search";
    case OP_DIR_DELETE: return "dir_delete";
    case OP_DIR_BDELETE: return "dir_bdelete";
    case OP_PUSH: return "push";
    case OP_POP: return "pop";
    case OP_ENQ: return "enq";
    case OP_DEQ: return "deq";
    case OP_ENQ_T: return "enq_t";
    case OP_DEQ_T: return "deq_t";
    case OP_ENQ_H: return "enq_h";
    case OP_DEQ_H: return "deq_h";
    case OP_SQ_ENQ: return "sq_enq";
    case OP_SQ_DEQ: return "sq_deq";
    case OP_DLQ_ENQ: return "dlq_enq";
    case OP_DLQ_DEQ: return "dlq_deq";
    case OP_COMBINE_PUSH: return "comb_push";
    case OP_COMBINE_POP: return "comb_pop";
    case OP_COMBINE_ENQDEQ: return "comb_enqdeq";
    case OP_LIST_INSERT: return "l_insert";
    case OP_LIST_SEARCH: return "l_search";
    case OP_LIST_DELETE: return "l_delete";
    case OP_LIST_REQC: return "l_reqc";
    case OP_LIST_CV: return "l_cv";
    case OP_LIST_CHUNK: return "l_chunk";
    case OP_PRIM_READ: return "rd";
    case OP_PRIM_WRITE: return "wr";
    case OP_PRIM_FAA: return "faa";
    case OP_PRIM_SWAP: return "swp";
    case OP_PRIM_CAS: return "cas";
    case OP_RW_RLOCK: return "rlock";
    case OP_RW_RUNLOCK: return "runlock";
    case OP_RW_WLOCK: return "wlock";
    case OP_RW_WUNLOCK: return "wunlock";
    case OP_RW_TRYLOCK: return "trylock";
    default: return "?";
  }
}

// Distinguished reply values. Structure elements are plain int64 payloads;
// kEmpty stands for the "structure empty" response.
inline constexpr Value kEmpty = INT64_MIN + 7;
inline constexpr Value kAckVal = 1;
inline constexpr Value kNackVal = 0;

}  // namespace mpds
