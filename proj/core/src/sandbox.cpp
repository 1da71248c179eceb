// Copyright 2026 The tirforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tirforge/sandbox.hpp"

#include <fcntl.h>
#include <linux/audit.h>
#include <linux/filter.h>
#include <linux/landlock.h>
#include <linux/seccomp.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/resource.h>
#include <sys/socket.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <regex>
#include <thread>
#include <utility>
#include <algorithm>

#include "tirforge/error.hpp"

namespace tirforge {

void ExecLimits::validate() const {
  if (!std::isfinite(wall_s) || wall_s <= 0.0) {
    throw PreconditionError("wall_s must be positive");
  }
  if (mem_mb <= 0) throw PreconditionError("mem_mb must be positive");
  if (stdout_cap_bytes == 0) throw PreconditionError("stdout_cap_bytes must be positive");
}

namespace {

using Clock = std::chrono::steady_clock;

// Landlock constants newer than the system headers may provide.
constexpr std::uint64_t kFsWriteFile = 1ULL << 1;
// WRITE_FILE plus REMOVE_DIR..MAKE_SYM (bits 4-12).
constexpr std::uint64_t kFsWriteMaskV1 = kFsWriteFile | (0x1FFULL << 4);
constexpr std::uint64_t kFsRefer = 1ULL << 13;
constexpr std::uint64_t kFsTruncate = 1ULL << 14;
constexpr std::uint64_t kNetBindTcp = 1ULL << 0;
constexpr std::uint64_t kNetConnectTcp = 1ULL << 1;

struct RulesetAttr {
  std::uint64_t handled_access_fs;
  std::uint64_t handled_access_net;
};

int landlock_abi() {
  static const int abi = [] {
    long v = syscall(SYS_landlock_create_ruleset, nullptr, 0, LANDLOCK_CREATE_RULESET_VERSION);
    return v < 0 ? 0 : static_cast<int>(v);
  }();
  return abi;
}

struct UniqueFd {
  int fd = -1;
  UniqueFd() = default;
  explicit UniqueFd(int f) : fd(f) {}
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  UniqueFd(UniqueFd&& o) noexcept : fd(std::exchange(o.fd, -1)) {}
  ~UniqueFd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

struct Pipe {
  UniqueFd read;
  UniqueFd write;
  static Pipe make() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) {
      throw Error(std::string("pipe2 failed: ") + std::strerror(errno));
    }
    Pipe p;
    p.read.fd = fds[0];
    p.write.fd = fds[1];
    return p;
  }
};

class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& root) {
    std::string tmpl = (root / "tirforge-exec-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw Error("cannot create scratch directory under " + root.string() + ": " +
                  std::strerror(errno));
    }
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string find_in_path(const std::string& name) {
  if (name.empty()) return {};
  if (name.find('/') != std::string::npos) {
    return ::access(name.c_str(), X_OK) == 0 ? name : std::string();
  }
  const char* path = std::getenv("PATH");
  std::string_view dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
  std::size_t pos = 0;
  while (pos <= dirs.size()) {
    auto colon = dirs.find(':', pos);
    std::string dir(dirs.substr(pos, colon == std::string_view::npos ? colon : colon - pos));
    if (!dir.empty()) {
      std::string candidate = dir + "/" + name;
      if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    }
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  return {};
}

#if defined(__x86_64__)
constexpr std::uint32_t kAuditArch = AUDIT_ARCH_X86_64;
#elif defined(__aarch64__)
constexpr std::uint32_t kAuditArch = AUDIT_ARCH_AARCH64;
#else
constexpr std::uint32_t kAuditArch = 0;
#endif

// socket(AF_INET | AF_INET6, ...) -> EACCES; everything else allowed.
constexpr std::array<sock_filter, 10> kSocketFilter = {{
    BPF_STMT(BPF_LD | BPF_W | BPF_ABS, offsetof(seccomp_data, arch)),
    BPF_JUMP(BPF_JMP | BPF_JEQ | BPF_K, kAuditArch, 1, 0),
    BPF_STMT(BPF_RET | BPF_K, SECCOMP_RET_ALLOW),
    BPF_STMT(BPF_LD | BPF_W | BPF_ABS, offsetof(seccomp_data, nr)),
    BPF_JUMP(BPF_JMP | BPF_JEQ | BPF_K, __NR_socket, 0, 3),
    BPF_STMT(BPF_LD | BPF_W | BPF_ABS, offsetof(seccomp_data, args[0])),
    BPF_JUMP(BPF_JMP | BPF_JEQ | BPF_K, AF_INET, 2, 0),
    BPF_JUMP(BPF_JMP | BPF_JEQ | BPF_K, AF_INET6, 1, 0),
    BPF_STMT(BPF_RET | BPF_K, SECCOMP_RET_ALLOW),
    BPF_STMT(BPF_RET | BPF_K, SECCOMP_RET_ERRNO | (EACCES & SECCOMP_RET_DATA)),
}};

enum ReportBits : unsigned char {
  kReportNetns = 1,
  kReportSeccomp = 2,
  kReportLandlock = 4,
};

// Everything the child needs, prepared before fork so the child only makes
// raw system calls.
struct ChildPlan {
  const char* exe = nullptr;
  std::vector<char*> argv;
  std::vector<char*> envp;
  const char* workdir = nullptr;
  int stdout_fd = -1;
  int stderr_fd = -1;
  int status_fd = -1;
  int scratch_path_fd = -1;
  int devnull_path_fd = -1;
  rlim_t mem_bytes = 0;
  rlim_t cpu_seconds = 0;
  bool deny_network = true;
  int landlock_abi = 0;
};

void set_limit(int resource, rlim_t value) {
  rlimit rl{value, value};
  ::setrlimit(resource, &rl);
}

bool apply_landlock(const ChildPlan& plan) {
  if (plan.landlock_abi < 1 || plan.scratch_path_fd < 0) return false;
  std::uint64_t fs = kFsWriteMaskV1;
  if (plan.landlock_abi >= 2) fs |= kFsRefer;
  if (plan.landlock_abi >= 3) fs |= kFsTruncate;
  RulesetAttr attr{fs, 0};
  std::size_t attr_size = sizeof(std::uint64_t);
  if (plan.landlock_abi >= 4 && plan.deny_network) {
    attr.handled_access_net = kNetBindTcp | kNetConnectTcp;
    attr_size = sizeof(RulesetAttr);
  }
  int ruleset = static_cast<int>(syscall(SYS_landlock_create_ruleset, &attr, attr_size, 0));
  if (ruleset < 0) return false;

  landlock_path_beneath_attr scratch{};
  scratch.allowed_access = fs;
  scratch.parent_fd = plan.scratch_path_fd;
  bool ok = syscall(SYS_landlock_add_rule, ruleset, LANDLOCK_RULE_PATH_BENEATH, &scratch, 0) == 0;
  if (ok && plan.devnull_path_fd >= 0) {
    landlock_path_beneath_attr devnull{};
    devnull.allowed_access = kFsWriteFile | (plan.landlock_abi >= 3 ? kFsTruncate : 0);
    devnull.parent_fd = plan.devnull_path_fd;
    syscall(SYS_landlock_add_rule, ruleset, LANDLOCK_RULE_PATH_BENEATH, &devnull, 0);
  }
  ok = ok && syscall(SYS_landlock_restrict_self, ruleset, 0) == 0;
  ::close(ruleset);
  return ok;
}

[[noreturn]] void run_child(const ChildPlan& plan) {
  ::setpgid(0, 0);
  int devnull = ::open("/dev/null", O_RDONLY);
  if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
  ::dup2(plan.stdout_fd, STDOUT_FILENO);
  ::dup2(plan.stderr_fd, STDERR_FILENO);

  auto fail = [&](int err) {
    (void)!::write(plan.status_fd, &err, sizeof err);
    ::_exit(127);
  };
  if (::chdir(plan.workdir) != 0) fail(errno);

  set_limit(RLIMIT_AS, plan.mem_bytes);
  set_limit(RLIMIT_CPU, plan.cpu_seconds);
  set_limit(RLIMIT_CORE, 0);
  set_limit(RLIMIT_FSIZE, 64ULL << 20);
  ::prctl(PR_SET_NO_NEW_PRIVS, 1, 0, 0, 0);

  unsigned char report = 0;
  if (plan.deny_network) {
    if (::unshare(CLONE_NEWNET) == 0) report |= kReportNetns;
    if (kAuditArch != 0) {
      sock_fprog prog{static_cast<unsigned short>(kSocketFilter.size()),
                      const_cast<sock_filter*>(kSocketFilter.data())};
      if (::prctl(PR_SET_SECCOMP, SECCOMP_MODE_FILTER, &prog) == 0) report |= kReportSeccomp;
    }
  }
  if (apply_landlock(plan)) report |= kReportLandlock;

  (void)!::write(plan.status_fd, &report, 1);
  ::execve(plan.exe, plan.argv.data(), plan.envp.data());
  fail(errno);
  ::_exit(127);
}

void append_capped(std::string& out, const char* data, std::size_t n, std::size_t cap,
                   bool& truncated) {
  if (out.size() >= cap) {
    truncated = truncated || n > 0;
    return;
  }
  std::size_t take = std::min(n, cap - out.size());
  out.append(data, take);
  if (take < n) truncated = true;
}

}  // namespace

Sandbox::Sandbox(SandboxConfig config)
    : config_(std::move(config)), interpreter_path_(find_in_path(config_.interpreter)) {}

ExecutionResult Sandbox::execute(std::string_view code, const ExecLimits& limits,
                                 IsolationReport* report) const {
  limits.validate();
  ExecutionResult result;
  if (interpreter_path_.empty()) {
    result.status = ExecStatus::kSpawnError;
    result.stderr_text = "interpreter not found: " + config_.interpreter;
    return result;
  }

  auto root = config_.scratch_root.empty() ? std::filesystem::temp_directory_path()
                                           : config_.scratch_root;
  ScratchDir scratch(root);
  {
    std::ofstream script(scratch.path() / config_.script_name, std::ios::binary);
    script << code;
    if (!script) throw Error("cannot write script into " + scratch.path().string());
  }

  Pipe out = Pipe::make();
  Pipe err = Pipe::make();
  Pipe status = Pipe::make();
  UniqueFd scratch_fd(::open(scratch.path().c_str(), O_PATH | O_CLOEXEC | O_DIRECTORY));
  UniqueFd devnull_fd(::open("/dev/null", O_PATH | O_CLOEXEC));

  std::string workdir = scratch.path().string();
  std::vector<std::string> args{interpreter_path_};
  args.insert(args.end(), config_.interpreter_args.begin(), config_.interpreter_args.end());
  args.push_back(config_.script_name);
  std::vector<std::string> env{
      "PATH=/usr/local/bin:/usr/bin:/bin",
      "HOME=" + workdir,
      "TMPDIR=" + workdir,
      "LANG=C.UTF-8",
      "PYTHONHASHSEED=0",
      "PYTHONDONTWRITEBYTECODE=1",
      "PYTHONIOENCODING=utf-8",
  };

  ChildPlan plan;
  plan.exe = interpreter_path_.c_str();
  for (auto& a : args) plan.argv.push_back(a.data());
  plan.argv.push_back(nullptr);
  for (auto& e : env) plan.envp.push_back(e.data());
  plan.envp.push_back(nullptr);
  plan.workdir = workdir.c_str();
  plan.stdout_fd = out.write.fd;
  plan.stderr_fd = err.write.fd;
  plan.status_fd = status.write.fd;
  plan.scratch_path_fd = scratch_fd.fd;
  plan.devnull_path_fd = devnull_fd.fd;
  plan.mem_bytes = static_cast<rlim_t>(limits.mem_mb) << 20;
  plan.cpu_seconds = static_cast<rlim_t>(std::ceil(limits.wall_s)) + 1;
  plan.deny_network = !limits.allow_network;
  plan.landlock_abi = landlock_abi();

  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::microseconds(static_cast<std::int64_t>(limits.wall_s * 1e6));
  pid_t pid = ::fork();
  if (pid < 0) {
    result.status = ExecStatus::kSpawnError;
    result.stderr_text = std::string("fork failed: ") + std::strerror(errno);
    return result;
  }
  if (pid == 0) run_child(plan);

  out.write.reset();
  err.write.reset();
  status.write.reset();

  unsigned char bits = 0;
  bool have_report = false;
  int exec_errno = 0;
  {
    std::array<char, 1 + sizeof(int)> buf{};
    std::size_t got = 0;
    while (got < buf.size()) {
      ssize_t n = ::read(status.read.fd, buf.data() + got, buf.size() - got);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      got += static_cast<std::size_t>(n);
    }
    if (got >= 1) {
      // A leading int errno (chdir failure) never reaches the report byte.
      if (got == sizeof(int)) {
        std::memcpy(&exec_errno, buf.data(), sizeof(int));
      } else {
        have_report = true;
        bits = static_cast<unsigned char>(buf[0]);
        if (got == buf.size()) std::memcpy(&exec_errno, buf.data() + 1, sizeof(int));
      }
    }
  }
  if (report) {
    report->network_namespace = bits & kReportNetns;
    report->socket_filter = bits & kReportSeccomp;
    report->filesystem_confined = bits & kReportLandlock;
  }

  if (!have_report || exec_errno != 0) {
    int st = 0;
    ::waitpid(pid, &st, 0);
    result.status = ExecStatus::kSpawnError;
    result.stderr_text = "cannot execute " + interpreter_path_ + ": " +
                         std::strerror(exec_errno != 0 ? exec_errno : ECHILD);
    result.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
                         .count();
    return result;
  }

  std::array<pollfd, 2> fds{{{out.read.fd, POLLIN, 0}, {err.read.fd, POLLIN, 0}}};
  std::array<std::string*, 2> sinks{&result.stdout_text, &result.stderr_text};
  bool stderr_truncated = false;
  std::array<bool*, 2> flags{&result.stdout_truncated, &stderr_truncated};
  std::array<char, 8192> buf{};

  bool reaped = false;
  bool timed_out = false;
  bool group_killed = false;
  int wait_status = 0;
  while (true) {
    if (!reaped && ::waitpid(pid, &wait_status, WNOHANG) == pid) reaped = true;
    bool pipes_open = fds[0].fd >= 0 || fds[1].fd >= 0;
    if (reaped && !group_killed) {
      // Descendants left behind must not keep the pipes alive.
      ::kill(-pid, SIGKILL);
      group_killed = true;
    }
    if (reaped && !pipes_open) break;

    auto now = Clock::now();
    if (!reaped && now >= deadline) {
      timed_out = true;
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &wait_status, 0);
      reaped = true;
      group_killed = true;
      continue;
    }
    if (!pipes_open) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
      continue;
    }
    auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    int timeout = reaped ? 50 : static_cast<int>(std::clamp<std::int64_t>(remaining, 1, 50));
    int ready = ::poll(fds.data(), fds.size(), timeout);
    if (ready < 0 && errno != EINTR) break;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t n = ::read(fds[i].fd, buf.data(), buf.size());
      if (n > 0) {
        append_capped(*sinks[i], buf.data(), static_cast<std::size_t>(n),
                      limits.stdout_cap_bytes, *flags[i]);
      } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        fds[i].fd = -1;
      }
    }
    if (reaped && ready == 0) {
      // Group is dead; nothing more can arrive.
      break;
    }
  }
  result.wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();

  if (WIFEXITED(wait_status)) {
    result.exit_code = WEXITSTATUS(wait_status);
  } else if (WIFSIGNALED(wait_status)) {
    result.exit_code = -WTERMSIG(wait_status);
  }

  if (timed_out) {
    result.status = ExecStatus::kTimeout;
  } else if (WIFSIGNALED(wait_status)) {
    int sig = WTERMSIG(wait_status);
    result.status = (sig == SIGXCPU || sig == SIGXFSZ || sig == SIGKILL)
                        ? ExecStatus::kResourceLimit
                        : ExecStatus::kRuntimeError;
  } else if (result.exit_code == 0) {
    result.status = ExecStatus::kOk;
  } else if (result.stderr_text.find("MemoryError") != std::string::npos) {
    result.status = ExecStatus::kResourceLimit;
  } else {
    result.status = ExecStatus::kRuntimeError;
  }
  return result;
}

ExecutionResult execute_code(std::string_view code, const ExecLimits& limits,
                             const SandboxConfig& config) {
  return Sandbox(config).execute(code, limits);
}

std::string normalize_output_line(std::string_view line) {
  static const std::regex kNumber(R"([-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)");
  std::string text(line);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();

  std::string out;
  auto last = text.cbegin();
  for (std::sregex_iterator it(text.begin(), text.end(), kNumber), end; it != end; ++it) {
    const auto& m = *it;
    out.append(last, m[0].first);
    std::string token = m.str();
    bool integral = token.find_first_of(".eE") == std::string::npos;
    if (integral) {
      if (token.front() == '+') token.erase(0, 1);
      out += token;
    } else {
      char formatted[64];
      std::snprintf(formatted, sizeof formatted, "%.10g", std::strtod(token.c_str(), nullptr));
      out += formatted;
    }
    last = m[0].second;
  }
  out.append(last, text.cend());
  return out;
}

ConsistencyVerdict verify_outputs(std::span<const std::string> claimed,
                                  const ExecutionResult& result) {
  ConsistencyVerdict verdict;
  std::vector<std::string> actual;
  if (result.ok()) {
    std::string_view s = result.stdout_text;
    std::size_t pos = 0;
    while (pos < s.size()) {
      auto nl = s.find('\n', pos);
      actual.emplace_back(s.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
  } else {
    verdict.first_mismatch = ConsistencyMismatch{
        0, claimed.empty() ? std::string() : claimed[0],
        "<execution " + std::string(to_string(result.status)) + ">"};
    return verdict;
  }

  std::size_t n = std::max(claimed.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string c = i < claimed.size() ? normalize_output_line(claimed[i]) : std::string();
    std::string a = i < actual.size() ? normalize_output_line(actual[i]) : std::string();
    if (i >= claimed.size() || i >= actual.size() || c != a) {
      verdict.first_mismatch = ConsistencyMismatch{
          i, i < claimed.size() ? claimed[i] : std::string(),
          i < actual.size() ? actual[i] : std::string()};
      return verdict;
    }
  }
  verdict.consistent = true;
  return verdict;
}

}  // namespace tirforge
