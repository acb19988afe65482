#pragma once

#include <cstdio>
#include <cstring>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpds/core.hpp"

namespace mpds {

// Invocation/response record. Events are totally ordered by idx (the
// simulator is single-threaded, so recording order is the real-time order).
struct HistoryEvent {
  std::int64_t idx = 0;
  int pid = 0;
  bool is_invoke = true;
  std::string op;
  Value a = 0, b = 0;   // operation arguments
  Value result = 0;     // responses only
};

// One operation, as reconstructed from an event pair.
struct OpRecord {
  int pid = 0;
  std::string op;
  Value a = 0, b = 0;
  bool completed = false;
  Value result = 0;
  std::int64_t inv = 0;
  std::int64_t res = 0;  // meaningful when completed
};

class History {
 public:
  // Returns the op handle used to attach the response.
  int invoke(int pid, std::string op, Value a = 0, Value b = 0) {
    events_.push_back({next_++, pid, true, std::move(op), a, b, 0});
    return static_cast<int>(events_.size()) - 1;
  }

  void respond(int invoke_handle, Value result) {
    const HistoryEvent& inv = events_.at(invoke_handle);
    if (!inv.is_invoke)
      throw std::logic_error("respond: handle is not an invoke");
    if (matched_.count(invoke_handle))
      throw std::logic_error("respond: already responded");
    events_.push_back({next_++, inv.pid, false, inv.op, inv.a, inv.b, result});
    matched_.insert({invoke_handle, static_cast<int>(events_.size()) - 1});
  }

  const std::vector<HistoryEvent>& events() const { return events_; }

  // Pair invocations with their responses; per-process alternation is
  // enforced (a process has at most one open operation).
  std::vector<OpRecord> ops() const { return extract(events_); }

  static std::vector<OpRecord> extract(const std::vector<HistoryEvent>& evs) {
    std::vector<OpRecord> out;
    std::vector<std::pair<int, int>> open;  // (pid, op index)
    for (const auto& e : evs) {
      if (e.is_invoke) {
        for (auto& [pid, _] : open)
          if (pid == e.pid)
            throw std::logic_error("history: overlapping ops in one process");
        OpRecord r;
        r.pid = e.pid;
        r.op = e.op;
        r.a = e.a;
        r.b = e.b;
        r.inv = e.idx;
        open.push_back({e.pid, static_cast<int>(out.size())});
        out.push_back(std::move(r));
      } else {
        int found = -1;
        for (size_t i = 0; i < open.size(); ++i)
          if (open[i].first == e.pid) found = static_cast<int>(i);
        if (found < 0)
          throw std::logic_error("history: response without open invoke");
        OpRecord& r = out[open[found].second];
        r.completed = true;
        r.result = e.result;
        r.res = e.idx;
        open.erase(open.begin() + found);
      }
    }
    return out;
  }

  // Line format: idx,pid,kind,op,args,result ("empty" encodes the empty
  // reply; args joins two values with a space).
  void write_csv(std::FILE* f) const {
    std::fputs("idx,pid,kind,op,args,result\n", f);
    for (const auto& e : events_) {
      std::string args = std::to_string(e.a);
      if (e.b != 0) args += " " + std::to_string(e.b);
      std::string res;
      if (!e.is_invoke)
        res = e.result == kEmpty ? "empty" : std::to_string(e.result);
      std::fprintf(f, "%lld,%d,%s,%s,%s,%s\n", static_cast<long long>(e.idx),
                   e.pid, e.is_invoke ? "inv" : "res", e.op.c_str(),
                   args.c_str(), res.c_str());
    }
  }

  static std::vector<HistoryEvent> read_csv(std::FILE* f) {
    std::vector<HistoryEvent> evs;
    char line[512];
    bool first = true;
    while (std::fgets(line, sizeof line, f)) {
      if (first) {
        first = false;
        if (std::strncmp(line, "idx,", 4) == 0) continue;
      }
      std::vector<std::string> cols;
      std::string cur;
      for (char* p = line; *p && *p != '\n'; ++p) {
        if (*p == ',') {
          cols.push_back(cur);
          cur.clear();
        } else {
          cur += *p;
        }
      }
      cols.push_back(cur);
      if (cols.size() != 6) throw std::runtime_error("history csv: bad row");
      HistoryEvent e;
      e.idx = std::stoll(cols[0]);
      e.pid = std::stoi(cols[1]);
      e.is_invoke = cols[2] == "inv";
      e.op = cols[3];
      if (auto sp = cols[4].find(' '); sp != std::string::npos) {
        e.a = std::stoll(cols[4].substr(0, sp));
        e.b = std::stoll(cols[4].substr(sp + 1));
      } else if (!cols[4].empty()) {
        e.a = std::stoll(cols[4]);
      }
      if (!e.is_invoke)
        e.result = cols[5] == "empty" ? kEmpty : std::stoll(cols[5]);
      evs.push_back(std::move(e));
    }
    return evs;
  }

 private:
  std::vector<HistoryEvent> events_;
  std::map<int, int> matched_;
  std::int64_t next_ = 0;
};

}  // namespace mpds
