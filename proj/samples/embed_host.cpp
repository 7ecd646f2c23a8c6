// A small host: one custom command, a counting constant, two contexts.
// Exits non-zero if the output differs from what a host would expect.

#include <iostream>
#include <string>

#include "t2script/t2script.hpp"

using namespace t2script;

int main() {
  int reads = 0;

  Configuration cfg;

  CommandSpec greet;
  greet.name = "greet";
  greet.arity = Arity::exactly(1, true);
  greet.handler = [](CommandCall& call) {
    call.output("hello, " + call.param(0));
    return ExecOutcome::success();
  };
  cfg.commands.push_back(greet);

  cfg.constants.emplace_back("counter", ConstantFunction([&reads] { return std::to_string(++reads); }));
  cfg.constants.emplace_back("version", Value("4.0"));

  Context left{"left", {}, {}};
  left.constants.emplace("window", Value("left pane"));
  Context right{"right", {}, {}};
  right.constants.emplace("window", Value("right pane"));
  right.command_filter = [](std::string_view name) { return name != "greet"; };
  cfg.contexts = {left, right};

  auto vm = configure(std::move(cfg));

  auto show = [&](const std::string& cmd, const std::string& ctx) {
    SubmitResult r = vm->submit(cmd, ctx);
    std::cout << "[" << ctx << "] " << cmd << " -> ";
    if (r.outcome.ok) std::cout << r.output;
    else std::cout << "error: " << r.outcome.error.value_or("") << '\n';
    return r;
  };

  bool good = true;
  good &= show("textout $_window", "left").output == "left pane\n";
  good &= show("textout $_window", "right").output == "right pane\n";
  good &= show("greet world", "left").output == "hello, world\n";
  good &= !show("greet world", "right").outcome.ok;
  good &= show("textout $_counter $_counter $_counter", "default").output == "1 2 3\n";
  good &= show("textout $_version", "default").output == "4.0\n";

  std::cout << (good ? "embedding sample ok" : "embedding sample FAILED") << '\n';
  return good ? 0 : 1;
}
