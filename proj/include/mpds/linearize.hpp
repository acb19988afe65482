#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mpds/history.hpp"

namespace mpds {

// Sequential specifications. State is a small value vector whose meaning
// depends on the kind: stack/queue/deque hold contents in order (front
// first), set holds sorted keys, register holds one value.
enum class SpecKind { Stack, Queue, Deque, Set, Register };

inline std::optional<SpecKind> spec_from_name(std::string_view s) {
  if (s == "stack") return SpecKind::Stack;
  if (s == "queue") return SpecKind::Queue;
  if (s == "deque") return SpecKind::Deque;
  if (s == "set") return SpecKind::Set;
  if (s == "register") return SpecKind::Register;
  return std::nullopt;
}

using SpecState = std::vector<Value>;

// Applies one operation to the state and returns the result the sequential
// structure would give. Unknown ops throw.
inline Value seq_apply(SpecKind kind, SpecState& st, std::string_view op,
                       Value a, Value b) {
  switch (kind) {
    case SpecKind::Stack:
      if (op == "push") {
        st.push_back(a);
        return kAckVal;
      }
      if (op == "pop") {
        if (st.empty()) return kEmpty;
        Value v = st.back();
        st.pop_back();
        return v;
      }
      break;
    case SpecKind::Queue:
      if (op == "enq") {
        st.push_back(a);
        return kAckVal;
      }
      if (op == "deq") {
        if (st.empty()) return kEmpty;
        Value v = st.front();
        st.erase(st.begin());
        return v;
      }
      break;
    case SpecKind::Deque:
      if (op == "enq_t") {
        st.push_back(a);
        return kAckVal;
      }
      if (op == "enq_h") {
        st.insert(st.begin(), a);
        return kAckVal;
      }
      if (op == "deq_t") {
        if (st.empty()) return kEmpty;
        Value v = st.back();
        st.pop_back();
        return v;
      }
      if (op == "deq_h") {
        if (st.empty()) return kEmpty;
        Value v = st.front();
        st.erase(st.begin());
        return v;
      }
      break;
    case SpecKind::Set: {
      auto it = std::lower_bound(st.begin(), st.end(), a);
      bool present = it != st.end() && *it == a;
      if (op == "insert") {
        if (present) return 0;
        st.insert(it, a);
        return 1;
      }
      if (op == "delete") {
        if (!present) return 0;
        st.erase(it);
        return 1;
      }
      if (op == "search") return present ? 1 : 0;
      break;
    }
    case SpecKind::Register: {
      if (st.empty()) st.push_back(0);
      Value& v = st[0];
      if (op == "rd") return v;
      if (op == "wr") {
        v = a;
        return kAckVal;
      }
      if (op == "faa") {
        v += a;
        return v;
      }
      if (op == "swp") {
        Value old = v;
        v = a;
        return old;
      }
      if (op == "cas") {
        Value old = v;
        if (v == a) v = b;
        return old;
      }
      break;
    }
  }
  throw std::logic_error("seq_apply: unknown op '" + std::string(op) + "'");
}

struct LinResult {
  bool ok = false;
  bool gave_up = false;            // history larger than the search cap
  std::vector<int> witness;        // op indexes in linearization order
  std::int64_t failing_prefix = -1;  // event count of a minimal bad prefix
};

namespace detail {

struct LinSearch {
  const std::vector<OpRecord>& ops;
  SpecKind kind;
  std::map<std::uint64_t, std::set<SpecState>> seen;
  std::vector<int> order;

  bool all_completed_done(std::uint64_t mask) const {
    for (size_t i = 0; i < ops.size(); ++i)
      if (ops[i].completed && !((mask >> i) & 1)) return false;
    return true;
  }

  // Wing–Gong style DFS with memoized (chosen-set, state) pairs. Pending
  // operations may be linearized with an unconstrained result or dropped.
  bool dfs(std::uint64_t mask, SpecState& st) {
    if (all_completed_done(mask)) return true;
    if (!seen[mask].insert(st).second) return false;

    std::int64_t barrier = std::numeric_limits<std::int64_t>::max();
    for (size_t i = 0; i < ops.size(); ++i)
      if (!((mask >> i) & 1) && ops[i].completed)
        barrier = std::min(barrier, ops[i].res);

    for (size_t i = 0; i < ops.size(); ++i) {
      if ((mask >> i) & 1) continue;
      const OpRecord& r = ops[i];
      if (r.inv > barrier) continue;  // someone else must go first
      SpecState next = st;
      Value res = seq_apply(kind, next, r.op, r.a, r.b);
      if (r.completed && res != r.result) continue;
      order.push_back(static_cast<int>(i));
      if (dfs(mask | (1ull << i), next)) return true;
      order.pop_back();
    }
    return false;
  }
};

}  // namespace detail

inline constexpr int kLinearizeCap = 14;

// Decides whether some total order of the recorded operations, consistent
// with their real-time order, replays correctly on the sequential spec.
// Pending invocations may take effect with any result or not at all.
inline LinResult check_linearizable(const std::vector<OpRecord>& ops,
                                    SpecKind kind, int cap = kLinearizeCap) {
  LinResult out;
  if (static_cast<int>(ops.size()) > cap) {
    out.gave_up = true;
    return out;
  }
  detail::LinSearch s{ops, kind};
  SpecState st;
  out.ok = s.dfs(0, st);
  if (out.ok) out.witness = s.order;
  return out;
}

// Convenience entry point over raw events; on failure also locates a
// minimal failing prefix (by event count).
inline LinResult check_history(const std::vector<HistoryEvent>& events,
                               SpecKind kind, int cap = kLinearizeCap) {
  auto ops = History::extract(events);
  LinResult r = check_linearizable(ops, kind, cap);
  if (!r.ok && !r.gave_up) {
    for (size_t n = 1; n <= events.size(); ++n) {
      std::vector<HistoryEvent> prefix(events.begin(), events.begin() + n);
      auto p = check_linearizable(History::extract(prefix), kind, cap);
      if (!p.ok && !p.gave_up) {
        r.failing_prefix = static_cast<std::int64_t>(n);
        break;
      }
    }
  }
  return r;
}

}  // namespace mpds
