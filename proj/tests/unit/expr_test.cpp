#include <gtest/gtest.h>

#include "oracle/expr_gen.hpp"
#include "support.hpp"

using namespace t2script;
using t2test::Harness;

namespace {

std::string eval(Harness& h, const std::string& expr) {
  auto [v, o] = h.run_body("\treturn " + expr + ";");
  if (!o.ok && o.is_error()) return "error: " + *o.error;
  return v;
}

std::string code(const std::string& s) {
  if (s.rfind("error: ", 0) != 0) return "<no error: " + s + ">";
  return s.substr(7, s.find(':', 7) - 7);
}

}  // namespace

TEST(Expr, PlainTextPassesThrough) {
  Harness h;
  EXPECT_EQ(h->interpolate("no dollars here"), "no dollars here");
}

TEST(Expr, ParseLocalIndex) {
  auto [node, end] = parse_expression("$@arg[0];", 0);
  EXPECT_EQ(node->modifier, Modifier::local);
  EXPECT_EQ(node->name, "arg");
  ASSERT_TRUE(node->index);
  EXPECT_FALSE(node->had_terminator);
  EXPECT_EQ(end, 8u);
}

TEST(Expr, ParseErrors) {
  auto code_of = [](std::string_view s) {
    try {
      parse_expression(s, 0);
    } catch (const std::exception& e) {
      std::string w = e.what();
      return w.substr(0, w.find(':'));
    }
    return std::string("<none>");
  };
  EXPECT_EQ(code_of("$?[+ 1 2"), "UnbalancedIndex");
  EXPECT_EQ(code_of("$@"), "EmptyName");
}

TEST(Expr, NestedIndex) {
  Harness h;
  h->scope().set_element("sinus", "90", "1");
  auto [v, o] = h.run_body("\tsetarray @angle 5 90;\n\treturn $sinus[$@angle[5]];");
  ASSERT_TRUE(o.ok || !o.is_error()) << o.error.value_or("");
  EXPECT_EQ(v, "1");
}

TEST(Expr, TerminatorConcatenates) {
  Harness h;
  h.single("setvar prog setvar name");
  h.single("mechanize $prog. John");
  EXPECT_EQ(h.single("textout $name"), "John\n");
  h.single("setvar a x");
  EXPECT_EQ(h.single("textout $a.y $a y"), "xy x y\n");
}

TEST(Expr, Constants) {
  Harness h;
  EXPECT_EQ(eval(h, "$_\\u(65)"), "A");
  EXPECT_EQ(eval(h, "$_true"), "1");
  EXPECT_EQ(eval(h, "$_false"), "0");
  EXPECT_EQ(eval(h, "$_\\$"), "$");
  EXPECT_EQ(eval(h, "a$_\\s.b"), "a b");
  EXPECT_EQ(eval(h, "$_Pi"), "3.14159265358979");
  EXPECT_EQ(code(eval(h, "$_nosuch")), "UnknownConstant");
}

TEST(Expr, ComplexExpressions) {
  Harness h;
  EXPECT_EQ(eval(h, "$?[+ 2 (- 7 8) 100]"), "101");
  EXPECT_EQ(eval(h, "$?[< 5 10]"), "1");
  EXPECT_EQ(eval(h, "$?[eq 5 5]"), "1");
  EXPECT_EQ(eval(h, "$?[tohex 255]"), "ff");
  EXPECT_EQ(eval(h, "$?[:== a A]"), "1");
  EXPECT_EQ(eval(h, "$?[== a A]"), "0");
  EXPECT_EQ(eval(h, "$?[concat first $_\\s second]"), "first second");
  EXPECT_EQ(code(eval(h, "$?[nosuchop 1]")), "UnknownOperator");
  EXPECT_EQ(code(eval(h, "$?[/ 1 0]")), "DivisionByZero");
  EXPECT_EQ(code(eval(h, "$?[+ a 1]")), "NonNumericArgument");
  EXPECT_EQ(code(eval(h, "$?[@@ 1]")), "UnimplementedOperator");
}

TEST(Expr, OrOverLocals) {
  Harness h;
  auto [v, o] = h.run_body("\targs name;\n\treturn $?[or (eq $@name Piotr) (eq $@name John)];", {"Piotr"});
  EXPECT_EQ(v, "1");
  auto [w, p] = h.run_body("\targs name;\n\treturn $?[or (eq $@name Piotr) (eq $@name John)];", {"Anna"});
  EXPECT_EQ(w, "0");
}

TEST(Expr, FunctionCallModes) {
  Harness h;
  h->load_source("#function fnc private()\n\treturn $@arg[0];\n#end fnc\n", "fnmod");
  EXPECT_EQ(eval(h, "$=fnc[first second]"), "first");
  EXPECT_EQ(eval(h, "$?[fnc (concat first $_\\s second)]"), "first second");
  EXPECT_EQ(code(eval(h, "$=missing[x]")), "UnknownFunction");
}

TEST(Expr, AssignmentAndExistence) {
  Harness h;
  EXPECT_EQ(eval(h, "$?[= newvar 5]"), "5");
  EXPECT_EQ(h.single("textout $newvar"), "5\n");
  EXPECT_EQ(eval(h, "$?[exists? newvar]"), "1");
  EXPECT_EQ(eval(h, "$?[exists? nothere]"), "0");
  EXPECT_EQ(code(eval(h, "$nothere")), "UnsetVariable");
}

TEST(Expr, CommandExecutionOperator) {
  Harness h;
  EXPECT_EQ(eval(h, "$?[!! (concat setvar $_\\s ran $_\\s yes)]"), "");
  EXPECT_EQ(h.single("textout $ran"), "yes\n");
  EXPECT_NE(eval(h, "$?[!! nosuchcmd]"), "");
}

// Every argument of an operator call is evaluated once.
TEST(Expr, StrictEvaluationCountsCalls) {
  Harness h;
  h->load_source("#function tick private()\n\tinc ticks;\n\treturn $@arg[0];\n#end tick\n", "tickmod");
  t2test::Gen g(5);
  for (int i = 0; i < 50; ++i) {
    h.single("setvar ticks 0");
    int n = static_cast<int>(g.range(2, 6));
    std::string e = "$?[+";
    for (int k = 0; k < n; ++k) e += g.coin() ? " (tick 1)" : " $=tick[1]";
    e += "]";
    EXPECT_EQ(eval(h, e), std::to_string(n));
    EXPECT_EQ(h.single("textout $ticks"), std::to_string(n) + "\n");
  }
}

TEST(Expr, DoubleNegationKeepsTruthiness) {
  Harness h;
  for (const char* v : {"0", "1", "", "abc", "00", "-1"}) {
    std::string x = std::string(v).empty() ? "$_empty" : v;
    std::string once = eval(h, std::string("$?[not ") + x + "]");
    std::string twice = eval(h, std::string("$?[not (not ") + x + ")]");
    EXPECT_EQ(truthy(twice), truthy(v)) << v;
    EXPECT_NE(truthy(once), truthy(v)) << v;
  }
}

// Dropping terminators at skip positions never changes the value.
TEST(Expr, TerminatorEquivalenceProperty) {
  oracle::ExprWorld world;
  Harness h;
  h->load_source("#function echo private()\n\treturn $@arg[0];\n#end echo\n", "echomod");
  std::string setup;
  for (auto& [k, v] : world.globals) h->scope().set(k, v);
  for (auto& [k, v] : world.locals) setup += "\tsetvar @" + k + " " + v + ";\n";

  oracle::ExprGenerator gen(77, world);
  for (int i = 0; i < 150; ++i) {
    auto tree = gen.make(3);
    std::string expect = gen.value(*tree);
    for (auto dots : {oracle::Dots::none, oracle::Dots::all, oracle::Dots::random}) {
      auto [v, o] = h.run_body(setup + "\treturn " + gen.text(*tree, dots) + ";");
      ASSERT_TRUE(o.ok || !o.is_error()) << o.error.value_or("");
      EXPECT_EQ(v, expect) << gen.text(*tree, dots);
    }
  }
}
