#include <gtest/gtest.h>

#include "support.hpp"

using namespace t2script;

namespace {

SourceUnit read(std::string_view src, SourceOrigin origin = SourceOrigin::script_file) {
  return read_source(src, origin, "test.tsc");
}

std::vector<std::string> texts(const SourceUnit& u) {
  std::vector<std::string> out;
  for (const auto& l : u.lines) out.push_back(l.text);
  return out;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::UnknownCommand;
}

const Reservoir& builtin_reservoir() {
  static Interpreter vm;
  static bool once = [] {
    register_builtins(vm);
    return true;
  }();
  (void)once;
  return vm.reservoir();
}

}  // namespace

TEST(Reader, JoinsWithSpaceConnector) {
  auto u = read("setvar multi My name is\n\tJames;");
  EXPECT_EQ(texts(u), std::vector<std::string>{"setvar multi My name is James"});
}

TEST(Reader, AcuteSuppressesConnector) {
  auto u = read("setvar Pi 3.1415926535`\n\t8979323846;");
  EXPECT_EQ(texts(u), std::vector<std::string>{"setvar Pi 3.14159265358979323846"});
}

TEST(Reader, CommentOnlyInputHasNoLines) {
  EXPECT_TRUE(read("// a comment\n").lines.empty());
  EXPECT_TRUE(read("   // indented comment\n\n").lines.empty());
}

TEST(Reader, CommentMarkerAfterTextIsKept) {
  auto u = read("textout http://example.com;");
  EXPECT_EQ(texts(u), std::vector<std::string>{"textout http://example.com"});
}

TEST(Reader, SemicolonInsideBracketsDoesNotSplit) {
  auto u = read("textout $?[concat a;b] done;");
  EXPECT_EQ(texts(u), std::vector<std::string>{"textout $?[concat a;b] done"});
}

TEST(Reader, SeveralCommandsOnOneLine) {
  auto u = read("null; null;\nnull;");
  EXPECT_EQ(u.lines.size(), 3u);
}

TEST(Reader, HashDirectiveWithSemicolonIsRejected) {
  EXPECT_EQ(code_of([] { read("#function f private();\n#end f\n"); }), ErrorCode::HashLineSemicolon);
}

TEST(Reader, BlockLines) {
  auto u = read("if $success {\n\tsetvar @text fine;\n} else {\n\tsetvar @text sick;\n}\n");
  ASSERT_EQ(u.lines.size(), 5u);
  EXPECT_EQ(u.lines[0].kind, LineKind::block_open);
  EXPECT_EQ(u.lines[0].text, "if $success");
  EXPECT_EQ(u.lines[2].kind, LineKind::block_close);
  EXPECT_EQ(u.lines[2].keyword, "else");
  EXPECT_EQ(u.lines[4].kind, LineKind::block_close);
}

TEST(Reader, SpansCoverPhysicalLines) {
  auto u = read("null;\nsetvar a\n b\n c;\n");
  ASSERT_EQ(u.lines.size(), 2u);
  EXPECT_EQ(u.lines[1].span.first_line, 2u);
  EXPECT_EQ(u.lines[1].span.last_line, 4u);
  for (const auto& l : u.lines) EXPECT_LE(l.span.first_line, l.span.last_line);
}

TEST(Reader, SingleCommandIgnoresTrailingSemicolon) {
  auto u = read("textout hi;", SourceOrigin::single_command);
  EXPECT_EQ(texts(u), std::vector<std::string>{"textout hi"});
}

TEST(Reader, MissingSemicolonBeforeCloseIsAcceptedAndLinted) {
  auto u = read("repeat 2 {\n\tnull\n}\n");
  EXPECT_EQ(u.lines.size(), 3u);
  EXPECT_FALSE(u.notes.empty());
}

TEST(Reader, Utf16WithBomDecodes) {
  std::string le = "\xFF\xFE";
  for (char c : std::string("null;")) {
    le += c;
    le += '\0';
  }
  EXPECT_EQ(decode_source(le), "null;");
  EXPECT_EQ(decode_source("\xEF\xBB\xBFnull;"), "null;");
  EXPECT_EQ(code_of([] { decode_source(std::string("\xFF\xFE\x00", 3)); }), ErrorCode::InvalidEncoding);
  EXPECT_EQ(code_of([] { decode_source("bad \xC3"); }), ErrorCode::InvalidEncoding);
}

// Re-reading the text of a logical line gives the same single line.
TEST(Reader, JoiningIsIdempotent) {
  t2test::Gen g(8);
  for (int i = 0; i < 300; ++i) {
    std::string src = "setvar v";
    auto parts = g.range(1, 4);
    for (int k = 0; k < parts; ++k) {
      src += " " + g.word();
      if (g.coin(0.4)) src += g.coin() ? "\n\t" : "`\n";
    }
    src += ";";
    auto first = read(src);
    ASSERT_EQ(first.lines.size(), 1u) << src;
    auto again = read(first.lines[0].text + ";");
    ASSERT_EQ(again.lines.size(), 1u);
    EXPECT_EQ(again.lines[0].text, first.lines[0].text);
  }
}

TEST(Compiler, ValidateCommandName) {
  EXPECT_TRUE(validate_command_name("setvar"));
  EXPECT_FALSE(validate_command_name("set var"));
  EXPECT_FALSE(validate_command_name("a/b"));
  EXPECT_FALSE(validate_command_name(""));
  for (const char* bad : {"a#", "a;", "a`", "a|"}) EXPECT_FALSE(validate_command_name(bad)) << bad;
  EXPECT_TRUE(validate_command_name("żółw"));
}

TEST(Compiler, SplitParams) {
  EXPECT_EQ(split_params("my_var Hello, this is multi words parameter", Arity::exactly(2, true)),
            (std::vector<std::string>{"my_var", "Hello, this is multi words parameter"}));
  EXPECT_EQ(split_params("i 0 $?[< $i 10]", Arity::exactly(3, true)),
            (std::vector<std::string>{"i", "0", "$?[< $i 10]"}));
  EXPECT_EQ(split_params("a  b", Arity::exactly(2)), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(split_params("a b c d", Arity::at_least(1)), (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(code_of([] { split_params("a", Arity::exactly(2)); }), ErrorCode::ArityMismatch);
  EXPECT_EQ(code_of([] { split_params("a b c", Arity::exactly(2)); }), ErrorCode::ArityMismatch);
}

TEST(Compiler, BlockCommandWithElse) {
  auto prog = compile_script(read("if $success {\n\tsetvar @text Patient fine;\n} else {\n\tsetvar @text Patient still sick;\n}\n"),
                             builtin_reservoir());
  ASSERT_EQ(prog.instructions.size(), 1u);
  const auto& inv = prog.instructions[0];
  EXPECT_EQ(inv.name, "if");
  EXPECT_EQ(inv.raw_params, std::vector<std::string>{"$success"});
  EXPECT_EQ(inv.blocks.size(), 2u);
  EXPECT_TRUE(inv.separation_keyword_present);
}

TEST(Compiler, KeywordOnItsOwnLine) {
  auto prog = compile_script(read("if 1 {\n\tnull;\n}\nELSE {\n\tnull;\n}\n"), builtin_reservoir());
  ASSERT_EQ(prog.instructions.size(), 1u);
  EXPECT_EQ(prog.instructions[0].blocks.size(), 2u);
}

TEST(Compiler, FunctionDefinition) {
  auto prog = compile_script(read("#function fnc private()\n\treturn $@arg[0];\n#end fnc\n"), builtin_reservoir(), "m");
  ASSERT_EQ(prog.functions.size(), 1u);
  EXPECT_EQ(prog.functions[0].name, "fnc");
  EXPECT_EQ(prog.functions[0].type, FunctionType::private_fn);
  ASSERT_EQ(prog.functions[0].body.size(), 1u);
  EXPECT_EQ(prog.functions[0].body[0].name, "return");
  EXPECT_TRUE(prog.instructions.empty());
}

TEST(Compiler, EventAndPublicFunction) {
  auto prog = compile_script(read("#event on_x multi()\n\targs who;\n\ttrigger;\n#end on_x\n"
                                  "#function f public() << on_x\n\tnull;\n#end f\n"),
                             builtin_reservoir());
  ASSERT_EQ(prog.events.size(), 1u);
  EXPECT_EQ(prog.events[0].type, EventType::multi);
  EXPECT_EQ(prog.events[0].declared_arg_names, std::vector<std::string>{"who"});
  ASSERT_EQ(prog.functions.size(), 1u);
  EXPECT_EQ(prog.functions[0].event_binding, std::optional<std::string>("on_x"));
}

TEST(Compiler, EmptyFile) {
  auto prog = compile_script(read(""), builtin_reservoir());
  EXPECT_TRUE(prog.instructions.empty());
  EXPECT_TRUE(prog.functions.empty());
  EXPECT_TRUE(prog.events.empty());
}

TEST(Compiler, Errors) {
  const auto& r = builtin_reservoir();
  auto fails = [&](const char* src) { return code_of([&] { compile_script(read(src), r); }); };
  EXPECT_EQ(fails("nosuchcmd a;"), ErrorCode::UnknownCommand);
  EXPECT_EQ(fails("#function f private()\nnull;\n#end g\n"), ErrorCode::EndNameMismatch);
  EXPECT_EQ(fails("#function f private()\nnull;\n#end f\n#function f private()\nnull;\n#end f\n"),
            ErrorCode::RedefinedFunction);
  EXPECT_EQ(fails("catch;"), ErrorCode::MissingRequiredBlock);
  EXPECT_EQ(fails("if 1 {\nnull;\n} every {\nnull;\n}\n"), ErrorCode::UnexpectedSeparationKeyword);
  EXPECT_EQ(fails("if 1 {\nnull;\n"), ErrorCode::UnterminatedBlock);
  EXPECT_EQ(fails("#function f private()\nnull;\n"), ErrorCode::UnterminatedDefinition);
  EXPECT_EQ(fails("setvar a b c {\nnull;\n}\n"), ErrorCode::UnexpectedBlock);
  EXPECT_EQ(fails("}\n"), ErrorCode::UnexpectedBlockClose);
  EXPECT_EQ(fails("#function f public()\n#end f\n"), ErrorCode::MalformedDirective);
  EXPECT_EQ(fails("#function f private() extra\n#end f\n"), ErrorCode::MalformedDirective);
  EXPECT_EQ(fails("null x;"), ErrorCode::ArityMismatch);
}

TEST(Compiler, SingleCommand) {
  const auto& r = builtin_reservoir();
  auto prog = compile_single(read("setvar my_var Hello, this is multi words parameter", SourceOrigin::single_command), r);
  ASSERT_EQ(prog.instructions.size(), 1u);
  EXPECT_EQ(prog.instructions[0].raw_params,
            (std::vector<std::string>{"my_var", "Hello, this is multi words parameter"}));
  auto upper = compile_single(read("SETVAR x 1", SourceOrigin::single_command), r);
  EXPECT_EQ(upper.instructions[0].command.slot, prog.instructions[0].command.slot);
  EXPECT_EQ(code_of([&] { compile_single(read("nosuchcmd a", SourceOrigin::single_command), r); }),
            ErrorCode::UnknownCommand);
  EXPECT_EQ(code_of([&] { compile_single(read("if 1 {", SourceOrigin::single_command), r); }),
            ErrorCode::BlockInSingleCommand);
  EXPECT_EQ(code_of([&] {
              compile_single(read("#function f private()\n#end f\n", SourceOrigin::meta_generated), r);
            }),
            ErrorCode::FunctionDefInMinimal);
}

TEST(Compiler, InlineForms) {
  auto prog = compile_script(read("while $?[< $i 0]. mlc textout $i||inc i;\nrepeat 3 inc n;\nif 1 textout y;\n"),
                             builtin_reservoir());
  ASSERT_EQ(prog.instructions.size(), 3u);
  for (const auto& inv : prog.instructions) {
    EXPECT_TRUE(inv.inline_form);
    ASSERT_EQ(inv.blocks.size(), 1u);
    EXPECT_EQ(inv.blocks[0].size(), 1u);
  }
  EXPECT_EQ(prog.instructions[0].blocks[0][0].name, "mlc");
}

// Rendering a compiled program and compiling it again gives the same tree.
TEST(Compiler, RenderRoundTrip) {
  const auto& r = builtin_reservoir();
  t2test::Gen g(21);
  std::function<std::string(int, int)> block = [&](int depth, int indent) {
    std::string pad(static_cast<std::size_t>(indent), '\t');
    std::string s;
    auto n = g.range(1, 3);
    for (int i = 0; i < n; ++i) {
      int roll = static_cast<int>(g.range(0, depth > 0 ? 5 : 2));
      if (roll == 0) s += pad + "SetVar v" + std::to_string(i) + " " + g.word() + " " + g.word() + ";\n";
      else if (roll == 1) s += pad + "textout $?[+ 1 2] x;\n";
      else if (roll == 2) s += pad + "null;\n";
      else if (roll == 3) s += pad + "repeat 2 {\n" + block(depth - 1, indent + 1) + pad + "}\n";
      else if (roll == 4)
        s += pad + "if 1 {\n" + block(depth - 1, indent + 1) + pad + "} else {\n" + block(depth - 1, indent + 1) + pad + "}\n";
      else s += pad + "for i 0 $?[< $i 2] {\n" + block(depth - 1, indent + 1) + pad + "} every {\n" + pad + "\tinc i;\n" + pad + "}\n";
    }
    return s;
  };
  std::function<void(const Sequence&, const Sequence&)> same = [&](const Sequence& a, const Sequence& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].name, b[i].name);
      EXPECT_EQ(a[i].raw_params, b[i].raw_params);
      ASSERT_EQ(a[i].blocks.size(), b[i].blocks.size());
      for (std::size_t k = 0; k < a[i].blocks.size(); ++k) same(a[i].blocks[k], b[i].blocks[k]);
    }
  };
  for (int i = 0; i < 100; ++i) {
    std::string src = block(3, 0);
    auto first = compile_script(read(src), r);
    std::string printed;
    for (const auto& inv : first.instructions) printed += render(inv);
    auto second = compile_script(read(printed), r);
    same(first.instructions, second.instructions);
  }
}
