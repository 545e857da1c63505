// Copyright 2026 The tfgb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <poll.h>
#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <thread>

#include "cli/report.hpp"
#include "cli/roles.hpp"
#include "tfgb/error.hpp"

extern char** environ;

namespace tfgb::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct Child {
  std::string name;
  pid_t pid = -1;
  int stdout_fd = -1;
  bool exited = false;
  int status = 0;
};

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exit code " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return std::string("signal ") + ::strsignal(WTERMSIG(status));
  return "status " + std::to_string(status);
}

// The driver's environment minus TFGB_* overrides.
std::vector<std::string> child_environment() {
  std::vector<std::string> env;
  for (char** e = environ; *e; ++e)
    if (std::strncmp(*e, "TFGB_", 5) != 0) env.emplace_back(*e);
  return env;
}

Child spawn(const std::string& name, const std::string& exe, const std::vector<std::string>& args, bool pipe_stdout) {
  int fds[2] = {-1, -1};
  if (pipe_stdout && ::pipe2(fds, O_CLOEXEC) != 0) throw StartupError("pipe: " + std::string(std::strerror(errno)));

  std::vector<std::string> argv_s = {exe};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::vector<std::string> env_s = child_environment();
  std::vector<char*> envp;
  for (auto& e : env_s) envp.push_back(e.data());
  envp.push_back(nullptr);

  const pid_t parent = ::getpid();
  std::cout.flush();
  const pid_t pid = ::fork();
  if (pid < 0) throw StartupError("fork: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    ::prctl(PR_SET_PDEATHSIG, SIGTERM);
    if (::getppid() != parent) ::_exit(127);
    if (pipe_stdout) ::dup2(fds[1], STDOUT_FILENO);
    ::execve(exe.c_str(), argv.data(), envp.data());
    ::_exit(127);
  }
  Child c;
  c.name = name;
  c.pid = pid;
  if (pipe_stdout) {
    ::close(fds[1]);
    c.stdout_fd = fds[0];
  }
  return c;
}

// Reads the child's stdout until a READY line, EOF or the deadline.
std::optional<std::string> await_ready(Child& c, Clock::time_point deadline) {
  std::string buf;
  char chunk[256];
  while (true) {
    const auto nl = buf.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (line.rfind("READY ", 0) == 0) return line.substr(6);
      continue;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) return std::nullopt;
    pollfd p{c.stdout_fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    const ssize_t n = ::read(c.stdout_fd, chunk, sizeof chunk);
    if (n <= 0) return std::nullopt;
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

class Supervisor {
 public:
  ~Supervisor() { kill_all(); }

  std::vector<Child>& children() { return children_; }

  void add(Child c) { children_.push_back(std::move(c)); }

  // Waits for one child to exit, up to `deadline`. Returns its index.
  std::optional<std::size_t> wait_any(Clock::time_point deadline) {
    while (Clock::now() < deadline) {
      int status = 0;
      const pid_t pid = ::waitpid(-1, &status, WNOHANG);
      if (pid > 0) {
        for (std::size_t i = 0; i < children_.size(); ++i) {
          if (children_[i].pid == pid) {
            children_[i].exited = true;
            children_[i].status = status;
            return i;
          }
        }
        continue;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return std::nullopt;
  }

  void terminate(Child& c, std::chrono::seconds grace) {
    if (c.exited) return;
    ::kill(c.pid, SIGTERM);
    const auto deadline = Clock::now() + grace;
    while (Clock::now() < deadline) {
      if (::waitpid(c.pid, &c.status, WNOHANG) == c.pid) {
        c.exited = true;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(c.pid, SIGKILL);
    ::waitpid(c.pid, &c.status, 0);
    c.exited = true;
  }

  void kill_all() {
    for (auto& c : children_) {
      if (!c.exited) {
        ::kill(c.pid, SIGKILL);
        ::waitpid(c.pid, &c.status, 0);
        c.exited = true;
      }
      if (c.stdout_fd >= 0) {
        ::close(c.stdout_fd);
        c.stdout_fd = -1;
      }
    }
  }

 private:
  std::vector<Child> children_;
};

[[noreturn]] void abort_run(Supervisor& sup, const std::string& message) {
  sup.kill_all();
  throw StartupError(message);
}

void check_echo(const nlohmann::json& echo, const BenchConfig& cfg, const std::string& who) {
  if (config_from_json(echo) != cfg) throw Error(who + " ran with a configuration different from the driver's");
}

}  // namespace

int run_driver(const RoleSpec& spec, const std::string& self_exe) {
  const BenchConfig& cfg = spec.config;
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path out_dir = spec.result_path;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  const std::string config_path = (out_dir / "effective-config.json").string();
  write_json_file(config_path, config_to_json(cfg));

  Supervisor sup;
  std::vector<std::size_t> ps_idx, worker_idx;
  for (std::size_t i = 0; i < cfg.num_ps; ++i) {
    const std::string result = (out_dir / ("ps-" + std::to_string(i) + ".json")).string();
    fs::remove(result, ec);
    sup.add(spawn("ps " + std::to_string(i), self_exe,
                  {"role", "ps", "--config", config_path, "--ps-index", std::to_string(i), "--result-path", result},
                  true));
    ps_idx.push_back(sup.children().size() - 1);
  }
  const auto ready_deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(spec.startup_timeout_secs));
  for (std::size_t i : ps_idx) {
    Child& c = sup.children()[i];
    const auto ep = await_ready(c, ready_deadline);
    if (!ep) {
      int status = 0;
      const bool died = ::waitpid(c.pid, &status, WNOHANG) == c.pid;
      if (died) c.exited = true;
      abort_run(sup, c.name + (died ? " exited during startup (" + describe_status(status) + ")"
                                    : " not ready within " + format_double(spec.startup_timeout_secs) + " s"));
    }
    std::cerr << c.name << " ready at " << *ep << '\n';
  }

  for (std::size_t w = 0; w < cfg.num_workers; ++w) {
    const std::string result = (out_dir / ("worker-" + std::to_string(w) + ".json")).string();
    fs::remove(result, ec);
    sup.add(spawn("worker " + std::to_string(w), self_exe,
                  {"role", "worker", "--config", config_path, "--worker-index", std::to_string(w), "--result-path",
                   result},
                  false));
    worker_idx.push_back(sup.children().size() - 1);
  }

  const double budget = 2.0 * static_cast<double>(cfg.repeats) * (cfg.warmup_secs + cfg.duration_secs) + 60.0;
  const auto run_deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(budget));
  std::size_t workers_left = cfg.num_workers;
  while (workers_left > 0) {
    const auto idx = sup.wait_any(run_deadline);
    if (!idx) abort_run(sup, "workers did not finish within " + format_double(budget) + " s");
    Child& c = sup.children()[*idx];
    const bool is_ps = std::find(ps_idx.begin(), ps_idx.end(), *idx) != ps_idx.end();
    if (is_ps) abort_run(sup, c.name + " died during the run (" + describe_status(c.status) + ")");
    const bool clean = WIFEXITED(c.status) && (WEXITSTATUS(c.status) == 0 || WEXITSTATUS(c.status) == kExitPartialFailure);
    if (!clean) abort_run(sup, c.name + " failed (" + describe_status(c.status) + ")");
    --workers_left;
  }
  for (std::size_t i : ps_idx) {
    Child& c = sup.children()[i];
    sup.terminate(c, std::chrono::seconds(10));
    if (!WIFEXITED(c.status) || WEXITSTATUS(c.status) != 0) {
      throw Error(c.name + " did not shut down cleanly (" + describe_status(c.status) + ")");
    }
  }
  sup.kill_all();

  ReportDocument doc;
  doc.config = cfg;
  doc.spec = cfg.payload_spec();
  doc.environment = Environment::capture();
  std::vector<std::vector<WorkerRepeat>> by_worker;
  for (std::size_t w = 0; w < cfg.num_workers; ++w) {
    const auto j = read_json_file((out_dir / ("worker-" + std::to_string(w) + ".json")).string());
    check_echo(j.at("config"), cfg, "worker " + std::to_string(w));
    std::vector<WorkerRepeat> reps;
    for (const auto& rj : j.at("repeats")) reps.push_back(worker_repeat_from_json(rj));
    by_worker.push_back(std::move(reps));
  }
  for (std::size_t i = 0; i < cfg.num_ps; ++i) {
    const auto j = read_json_file((out_dir / ("ps-" + std::to_string(i) + ".json")).string());
    check_echo(j.at("config"), cfg, "ps " + std::to_string(i));
    doc.ps_resources.push_back(series_from_json(j.at("resources")));
  }
  doc.repeats = merge_repeats(cfg, by_worker);
  bool all_ok = true;
  for (const auto& r : doc.repeats) all_ok = all_ok && r.ok;
  try {
    doc.averaged = aggregate_runs(doc.repeats);
  } catch (const Error&) {
    doc.averaged.reset();
  }
  write_report(doc, out_dir.string());

  std::cout << to_string(cfg.benchmark) << ": " << doc.repeats.size() << " repeat(s), "
            << (doc.averaged ? doc.averaged->successful : 0) << " ok\n";
  if (doc.averaged) {
    for (const auto& [name, value] : doc.averaged->means) std::cout << "  " << name << " = " << format_double(value) << '\n';
  }
  for (const auto& r : doc.repeats)
    if (!r.ok) std::cerr << "repeat " << r.index << " failed: " << r.error << '\n';
  std::cout << "report: " << (out_dir / "report.json").string() << '\n';
  return all_ok ? 0 : 1;
}

}  // namespace tfgb::cli
