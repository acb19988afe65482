#pragma once

#include <string>
#include <vector>

#include "mpds/sim.hpp"

namespace mpds {

// Token bookkeeping shared by the token-based structures. Servers report
// every ownership change and every forward; tests replay the trail to check
// uniqueness (one holder per token kind at any configuration) and the
// full/empty forwarding preconditions.
struct TokenAudit {
  enum class What { Acquire, Release, Forward };
  struct Entry {
    Step step;
    int server;
    std::int64_t kind;  // TK_TOKEN / TK_TAIL / TK_HEAD
    What what;
    int to = -1;          // Forward: destination server index
    bool precondition = true;  // Forward: full/empty condition held
  };
  std::vector<Entry> entries;

  void acquire(Step t, int server, std::int64_t kind) {
    entries.push_back({t, server, kind, What::Acquire});
  }
  void release(Step t, int server, std::int64_t kind) {
    entries.push_back({t, server, kind, What::Release});
  }
  void forward(Step t, int server, std::int64_t kind, int to, bool pre) {
    entries.push_back({t, server, kind, What::Forward, to, pre});
  }

  // Ownership intervals per kind never overlap: every acquire must follow
  // the previous holder's release.
  bool unique_ownership(std::int64_t kind, int initial_server) const {
    int holder = initial_server;
    bool held = true;
    for (const auto& e : entries) {
      if (e.kind != kind) continue;
      switch (e.what) {
        case What::Release:
          if (!held || e.server != holder) return false;
          held = false;
          break;
        case What::Acquire:
          if (held) return false;
          holder = e.server;
          held = true;
          break;
        case What::Forward:
          break;
      }
    }
    return true;
  }

  bool all_preconditions_hold() const {
    for (const auto& e : entries)
      if (e.what == What::Forward && !e.precondition) return false;
    return true;
  }
};

inline int ring_next(int sid, int ns) { return (sid + 1) % ns; }
inline int ring_prev(int sid, int ns) { return (sid + ns - 1) % ns; }

// Per-client record of a directly received request; guarantees exactly one
// reply even when the token keeps moving ahead of the forwarded message.
struct ClientTableEntry {
  int op = OP_NONE;
  Value data = 0;
  bool served = false;
};

}  // namespace mpds
