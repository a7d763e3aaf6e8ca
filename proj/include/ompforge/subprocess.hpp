#pragma once

#include "ompforge/errors.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ompforge {

// Outcome of one child process. A signal death is folded into the shell
// convention exit code 128+signo so callers can band on a single integer.
struct ProcessResult {
    int exit_code = 0;
    bool signaled = false;
    bool timed_out = false;
    double seconds = 0.0;
    std::string output; // stdout+stderr interleaved, truncated at output_cap
};

inline constexpr std::size_t kProcessOutputCap = 64 * 1024;

namespace detail {

inline double monotonic_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

inline ProcessResult supervise_child(pid_t pid, int out_fd, double timeout_s) {
    ProcessResult res;
    const double start = monotonic_seconds();
    const double deadline = timeout_s > 0 ? start + timeout_s : 0;
    bool killed = false;
    char buf[4096];
    bool eof = false;
    while (!eof) {
        pollfd pfd{out_fd, POLLIN, 0};
        int timeout_ms = 200;
        if (deadline > 0) {
            double left = deadline - monotonic_seconds();
            if (left <= 0 && !killed) {
                kill(pid, SIGKILL);
                killed = true;
            }
            if (left > 0 && left * 1000 < timeout_ms) timeout_ms = static_cast<int>(left * 1000) + 1;
        }
        int pr = poll(&pfd, 1, timeout_ms);
        if (pr < 0 && errno != EINTR) break;
        if (pr > 0) {
            ssize_t n = read(out_fd, buf, sizeof(buf));
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                eof = true;
            } else if (res.output.size() < kProcessOutputCap) {
                res.output.append(buf, buf + std::min<std::size_t>(static_cast<std::size_t>(n),
                                                                   kProcessOutputCap - res.output.size()));
            }
        }
    }
    close(out_fd);
    int status = 0;
    waitpid(pid, &status, 0);
    res.seconds = monotonic_seconds() - start;
    res.timed_out = killed;
    if (WIFSIGNALED(status)) {
        res.signaled = true;
        res.exit_code = 128 + WTERMSIG(status);
    } else {
        res.exit_code = WEXITSTATUS(status);
    }
    return res;
}

template <typename ExecFn>
inline ProcessResult spawn_and_supervise(double timeout_s, ExecFn&& exec_in_child) {
    int fds[2];
    if (pipe(fds) != 0) throw IoError(std::string("pipe: ") + std::strerror(errno));
    pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        throw IoError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        close(fds[0]);
        dup2(fds[1], STDOUT_FILENO);
        dup2(fds[1], STDERR_FILENO);
        close(fds[1]);
        exec_in_child();
        _exit(127);
    }
    close(fds[1]);
    return supervise_child(pid, fds[0], timeout_s);
}

} // namespace detail

// Run argv[0] with the given arguments, capturing combined stdout/stderr.
// timeout_s <= 0 means no limit; on timeout the child is SIGKILLed.
inline ProcessResult run_argv(const std::vector<std::string>& argv, double timeout_s,
                              const std::string& working_dir = {}) {
    if (argv.empty()) throw EmptyInput("run_argv: empty argv");
    return detail::spawn_and_supervise(timeout_s, [&] {
        if (!working_dir.empty() && chdir(working_dir.c_str()) != 0) _exit(126);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
    });
}

// Run a command line through /bin/sh -c (benchmark command templates).
inline ProcessResult run_shell(const std::string& command, double timeout_s,
                               const std::string& working_dir = {}) {
    return detail::spawn_and_supervise(timeout_s, [&] {
        if (!working_dir.empty() && chdir(working_dir.c_str()) != 0) _exit(126);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    });
}

// True if `exe` names something we could exec: an executable path, or a
// bare name found on $PATH.
inline bool executable_available(const std::string& exe) {
    if (exe.empty()) return false;
    if (exe.find('/') != std::string::npos) return access(exe.c_str(), X_OK) == 0;
    const char* path = std::getenv("PATH");
    if (!path) return false;
    std::string dirs(path);
    std::size_t pos = 0;
    while (pos <= dirs.size()) {
        std::size_t next = dirs.find(':', pos);
        std::string dir = dirs.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (!dir.empty() && access((dir + "/" + exe).c_str(), X_OK) == 0) return true;
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return false;
}

} // namespace ompforge
