#pragma once

#include <vector>

#include "mpds/token_common.hpp"

namespace mpds {

// Token-based stack over a non-wrapping ring: the token travels forward as
// chunks fill and backward as they drain; server NS-1 full means stack full,
// server 0 empty means stack empty.
struct TokenStackConfig {
  int ns = 2;
  int capacity = 64;  // elements per local stack
  std::vector<CoreId> server_cores;
};

struct TokenStackState {
  int my_sid = 0;
  std::vector<Value> lstack;
  int token = 0;  // id of the believed token server; my_sid when held
};

inline Proc token_stack_server(Ctx& ctx, const TokenStackConfig& cfg,
                               TokenStackState& st, TokenAudit* audit) {
  const int ns = cfg.ns;
  for (;;) {
    Message m = co_await ctx.recv(Filter::ops({OP_PUSH, OP_POP}));
    if (m.tk == TK_TOKEN) {
      st.token = st.my_sid;
      if (audit) audit->acquire(ctx.now(), st.my_sid, TK_TOKEN);
    }
    if (m.op == OP_PUSH) {
      if (st.token != st.my_sid) {
        m.tk = TK_NONE;
        co_await ctx.send(cfg.server_cores[st.token], std::move(m));
      } else if (st.lstack.size() < static_cast<size_t>(cfg.capacity)) {
        st.lstack.push_back(m.val);
        Message r;
        r.op = OP_ACK;
        r.sid = st.my_sid;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
      } else if (st.my_sid != ns - 1) {
        st.token = st.my_sid + 1;
        if (audit) {
          audit->release(ctx.now(), st.my_sid, TK_TOKEN);
          audit->forward(ctx.now(), st.my_sid, TK_TOKEN, st.token,
                         st.lstack.size() >= static_cast<size_t>(cfg.capacity));
        }
        m.tk = TK_TOKEN;
        co_await ctx.send(cfg.server_cores[st.token], std::move(m));
      } else {  // last server full: the stack is full
        Message r;
        r.op = OP_NACK;
        r.sid = st.my_sid;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
      }
    } else {  // POP
      if (st.token != st.my_sid) {
        m.tk = TK_NONE;
        co_await ctx.send(cfg.server_cores[st.token], std::move(m));
      } else if (!st.lstack.empty()) {
        Message r;
        r.op = OP_ACK;
        r.val = st.lstack.back();
        st.lstack.pop_back();
        r.sid = st.my_sid;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
      } else if (st.my_sid != 0) {
        st.token = st.my_sid - 1;
        if (audit) {
          audit->release(ctx.now(), st.my_sid, TK_TOKEN);
          audit->forward(ctx.now(), st.my_sid, TK_TOKEN, st.token,
                         st.lstack.empty());
        }
        m.tk = TK_TOKEN;
        co_await ctx.send(cfg.server_cores[st.token], std::move(m));
      } else {  // first server empty: the stack is empty
        Message r;
        r.op = OP_NACK;
        r.sid = st.my_sid;
        co_await ctx.send(static_cast<CoreId>(m.cid), std::move(r));
      }
    }
  }
}

// Clients remember the id of the last responding server (lazily updated).
inline Task<bool> tstack_push(Ctx& ctx, const TokenStackConfig& cfg, int& sid,
                              Value v) {
  Message m;
  m.op = OP_PUSH;
  m.val = v;
  m.cid = ctx.self;
  co_await ctx.send(cfg.server_cores[sid], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  sid = static_cast<int>(r.sid);
  co_return r.op == OP_ACK;
}

inline Task<Value> tstack_pop(Ctx& ctx, const TokenStackConfig& cfg, int& sid) {
  Message m;
  m.op = OP_POP;
  m.cid = ctx.self;
  co_await ctx.send(cfg.server_cores[sid], std::move(m));
  Message r = co_await ctx.recv(Filter::ops({OP_ACK, OP_NACK}));
  sid = static_cast<int>(r.sid);
  co_return r.op == OP_ACK ? r.val : kEmpty;
}

}  // namespace mpds
