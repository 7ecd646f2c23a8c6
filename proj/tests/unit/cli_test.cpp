#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "support.hpp"

#ifndef T2S_CLI_PATH
#define T2S_CLI_PATH "t2s"
#endif

namespace {

struct CliRun {
  std::string out;
  int status = -1;
};

// stdout only; stderr goes to a file so tests can look at it separately
CliRun cli(const std::string& args, const std::string& stdin_text = {}, std::string* err = nullptr) {
  namespace fs = std::filesystem;
  fs::path in = fs::temp_directory_path() / "t2s_cli_in.txt";
  fs::path errf = fs::temp_directory_path() / "t2s_cli_err.txt";
  std::ofstream(in) << stdin_text;
  std::string cmd = std::string("'") + T2S_CLI_PATH + "' " + args + " < '" + in.string() + "' 2> '" + errf.string() + "'";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  if (err) *err = t2test::slurp(errf);
  return r;
}

std::string listings() { return "'" + (t2test::samples_dir() / "listings").string() + "'"; }

}  // namespace

TEST(Cli, EvalPrints) {
  CliRun r = cli("-e 'textout hello'");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "hello\n");
}

TEST(Cli, SeveralEvals) {
  CliRun r = cli("-e 'setvar x 4' -e 'textout $?[* $x 2]'");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "8\n");
}

TEST(Cli, RunListing) {
  CliRun r = cli("--script-root " + listings() + " run for_loop.tsc");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "0\n1\n2\n3\n4\n6\n7\n8\n9\n10\n");
}

TEST(Cli, RunWithTimers) {
  CliRun r = cli("--script-root " + listings() + " run timer_fast.tsc");
  EXPECT_EQ(r.status, 0);
  std::string want;
  for (int i = 0; i < 10; ++i) want += "Local variable\n";
  EXPECT_EQ(r.out, want);
}

TEST(Cli, DisableRemovesAccess) {
  std::string err;
  CliRun r = cli("--disable mechanize,mlc -e 'mechanize null'", {}, &err);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(err.find("DisabledCommand"), std::string::npos);
}

TEST(Cli, CompileErrorExitCode) {
  std::string err;
  CliRun r = cli("-e 'nosuchcmd x'", {}, &err);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(err.find("UnknownCommand"), std::string::npos);
}

TEST(Cli, MissingFile) {
  CliRun r = cli("run /definitely/missing.tsc");
  EXPECT_NE(r.status, 0);
}

TEST(Cli, Lint) {
  namespace fs = std::filesystem;
  fs::path f = fs::temp_directory_path() / "t2s_lint.tsc";
  std::ofstream(f) << "repeat 1 {\n\ttextout x\n}\n";
  std::string err;
  CliRun r = cli("run --lint '" + f.string() + "'", {}, &err);
  EXPECT_EQ(r.status, 0);
  EXPECT_FALSE(err.empty());
  fs::remove(f);
}

TEST(Cli, Repl) {
  std::string err;
  CliRun r = cli("repl", "SeTvAr y 1\ntextout $y\nif $x { null }\ntextout after\n:quit\ntextout never\n", &err);
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "1\nafter\n");
  EXPECT_NE(err.find("BlockInSingleCommand"), std::string::npos);
}

TEST(Cli, Trace) {
  std::string err;
  CliRun r = cli("--trace -e 'mlc null||null'", {}, &err);
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(err.find("mlc"), std::string::npos);
}
