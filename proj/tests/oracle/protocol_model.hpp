#pragma once

// Random programs over loops, catch, function calls and a host command
// `emit` that ends with a chosen result. The model interprets the same tree
// directly, following the result table: plain false leaves the function,
// break/continue act on the innermost loop, anything else is an error that
// travels up to the nearest catch.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace oracle {

enum class Emit { ok, plain_false, brk, cont, error };

struct Node {
  enum Type { emit, mark, repeat, catcher, call } type = mark;
  Emit emit_kind = Emit::ok;
  int id = 0;
  int count = 0;  // repeat
  int callee = 0;
  std::vector<Node> body;
};

struct ProtocolProgram {
  std::vector<std::vector<Node>> functions;  // f0 is the entry
};

struct Outcome {
  enum Kind { ok, plain_false, brk, cont, failed } kind = ok;
  std::string error;
  bool operator==(const Outcome&) const = default;
};

inline std::string error_text(int id) { return "boom" + std::to_string(id); }

class ProtocolModel {
 public:
  explicit ProtocolModel(const ProtocolProgram& p) : p_(p) {}

  std::string out;

  /// Result of calling f0 from the host.
  Outcome run() { return call(0); }

 private:
  Outcome call(int fn) {
    Outcome o = seq(p_.functions[static_cast<std::size_t>(fn)]);
    // the frame boundary absorbs everything but errors
    if (o.kind != Outcome::failed) return {};
    return o;
  }

  Outcome seq(const std::vector<Node>& nodes) {
    for (const auto& n : nodes) {
      Outcome o = node(n);
      if (o.kind != Outcome::ok) return o;
    }
    return {};
  }

  Outcome node(const Node& n) {
    switch (n.type) {
      case Node::mark:
        out += "m" + std::to_string(n.id) + "\n";
        return {};
      case Node::emit:
        switch (n.emit_kind) {
          case Emit::ok: return {};
          case Emit::plain_false: return {Outcome::plain_false, {}};
          case Emit::brk: return {Outcome::brk, {}};
          case Emit::cont: return {Outcome::cont, {}};
          case Emit::error: return {Outcome::failed, error_text(n.id)};
        }
        return {};
      case Node::repeat:
        for (int i = 0; i < n.count; ++i) {
          Outcome o = seq(n.body);
          if (o.kind == Outcome::brk) break;
          if (o.kind == Outcome::ok || o.kind == Outcome::cont) continue;
          return o;
        }
        return {};
      case Node::catcher: {
        Outcome o = seq(n.body);
        std::string caught = "none";
        if (o.kind == Outcome::failed) {
          caught = o.error;
          o = {};
        }
        if (o.kind != Outcome::ok) return o;
        out += "c" + std::to_string(n.id) + " " + caught + "\n";
        return {};
      }
      case Node::call:
        return call(n.callee);
    }
    return {};
  }

  const ProtocolProgram& p_;
};

class ProtocolGenerator {
 public:
  explicit ProtocolGenerator(std::uint64_t seed) : rng_(seed) {}

  ProtocolProgram make() {
    ProtocolProgram p;
    next_id_ = 0;
    int fns = pick(1, 3);
    p.functions.resize(static_cast<std::size_t>(fns));
    for (int f = fns - 1; f >= 0; --f) p.functions[static_cast<std::size_t>(f)] = seq(3, f, fns);
    return p;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::vector<Node> seq(int depth, int fn, int fns) {
    std::vector<Node> out;
    int n = pick(1, 4);
    for (int i = 0; i < n; ++i) out.push_back(node(depth, fn, fns));
    return out;
  }

  Node node(int depth, int fn, int fns) {
    Node n;
    n.id = next_id_++;
    int roll = pick(0, depth > 0 ? 9 : 5);
    if (roll <= 2) {
      n.type = Node::mark;
    } else if (roll <= 5) {
      n.type = Node::emit;
      n.emit_kind = static_cast<Emit>(pick(0, 4));
    } else if (roll <= 7) {
      n.type = Node::repeat;
      n.count = pick(0, 3);
      n.body = seq(depth - 1, fn, fns);
    } else if (roll == 8) {
      n.type = Node::catcher;
      n.body = seq(depth - 1, fn, fns);
    } else if (fn + 1 < fns) {
      n.type = Node::call;
      n.callee = pick(fn + 1, fns - 1);
    } else {
      n.type = Node::mark;
    }
    return n;
  }

  std::mt19937_64 rng_;
  int next_id_ = 0;
};

inline void render_nodes(const std::vector<Node>& nodes, std::string& src, int indent) {
  std::string pad(static_cast<std::size_t>(indent), '\t');
  for (const auto& n : nodes) {
    std::string id = std::to_string(n.id);
    switch (n.type) {
      case Node::mark:
        src += pad + "textout m" + id + ";\n";
        break;
      case Node::emit: {
        static const char* names[] = {"ok", "false", "break", "continue", "error"};
        src += pad + "emit " + names[static_cast<int>(n.emit_kind)] + " " + id + ";\n";
        break;
      }
      case Node::repeat:
        src += pad + "repeat " + std::to_string(n.count) + " {\n";
        render_nodes(n.body, src, indent + 1);
        src += pad + "}\n";
        break;
      case Node::catcher:
        src += pad + "setvar @e" + id + " none;\n";
        src += pad + "catch @e" + id + " {\n";
        render_nodes(n.body, src, indent + 1);
        src += pad + "}\n";
        src += pad + "textout c" + id + " $@e" + id + ";\n";
        break;
      case Node::call:
        src += pad + "function pf" + std::to_string(n.callee) + ";\n";
        break;
    }
  }
}

inline std::string render(const ProtocolProgram& p) {
  std::string src;
  for (std::size_t f = 0; f < p.functions.size(); ++f) {
    src += "#function pf" + std::to_string(f) + " private()\n";
    render_nodes(p.functions[f], src, 1);
    src += "#end pf" + std::to_string(f) + "\n\n";
  }
  return src;
}

}  // namespace oracle
