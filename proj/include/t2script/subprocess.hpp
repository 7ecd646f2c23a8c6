#pragma once

// Child process with piped stdin/stdout, used by `envrs`.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "t2script/error.hpp"
#include "t2script/text.hpp"

extern char** environ;

namespace t2script {

/// Splits on white space; single or double quotes group words.
inline std::vector<std::string> split_command_args(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (char c : s) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur += c;
    } else if (c == '"' || c == '\'') {
      quote = c;
      have = true;
    } else if (text::is_white(c)) {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (have) out.push_back(std::move(cur));
  return out;
}

namespace detail {

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

}  // namespace detail

/// Runs `program args...`, feeds `input` on stdin and returns stdout.
/// Throws Error with SpawnFailure, NonZeroExit or EnvrsTimeout.
inline std::string run_process(const std::string& program, const std::vector<std::string>& args,
                               std::string_view input, std::chrono::milliseconds timeout) {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw Error(ErrorCode::SpawnFailure, std::string("socketpair: ") + std::strerror(errno));
  }
  detail::Fd in_parent(sv[0]), in_child(sv[1]);
  int pp[2];
  if (::pipe2(pp, O_CLOEXEC) != 0) throw Error(ErrorCode::SpawnFailure, std::string("pipe: ") + std::strerror(errno));
  detail::Fd out_parent(pp[0]), out_child(pp[1]);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_child.fd, 0);
  posix_spawn_file_actions_adddup2(&actions, out_child.fd, 1);

  std::vector<std::string> argv_store{program};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  int rc = posix_spawnp(&pid, program.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw Error(ErrorCode::SpawnFailure, program + ": " + std::strerror(rc));
  in_child.reset();
  out_child.reset();

  ::shutdown(in_parent.fd, SHUT_RD);
  std::size_t written = 0;
  if (input.empty()) in_parent.reset();
  std::string output;
  auto deadline = std::chrono::steady_clock::now() + timeout;
  bool timed_out = false;
  while (out_parent.fd >= 0) {
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {out_parent.fd, POLLIN, 0};
    if (in_parent.fd >= 0) fds[n++] = {in_parent.fd, POLLOUT, 0};
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    int r = ::poll(fds, n, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = ::send(in_parent.fd, input.data() + written, input.size() - written, MSG_NOSIGNAL | MSG_DONTWAIT);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN && errno != EINTR) written = input.size();  // reader went away
      if (written == input.size()) in_parent.reset();
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[4096];
      ssize_t got = ::read(out_parent.fd, buf, sizeof buf);
      if (got > 0) output.append(buf, static_cast<std::size_t>(got));
      else if (got == 0 || errno != EINTR) out_parent.reset();
    }
  }
  in_parent.reset();
  out_parent.reset();
  if (timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) throw Error(ErrorCode::EnvrsTimeout, program + " did not finish in time");
  if (WIFEXITED(status) && WEXITSTATUS(status) != 0) {
    throw Error(ErrorCode::NonZeroExit, program + " exited with status " + std::to_string(WEXITSTATUS(status)));
  }
  if (WIFSIGNALED(status)) {
    throw Error(ErrorCode::NonZeroExit, program + " killed by signal " + std::to_string(WTERMSIG(status)));
  }
  return output;
}

}  // namespace t2script
