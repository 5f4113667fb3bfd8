#include "pbitsim/spice_bridge.hpp"

#include "pbitsim/errors.hpp"
#include "pbitsim/text_io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace pbitsim::spice {
namespace {

std::size_t line_of(std::string_view text, std::size_t offset) {
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

/// Length of the number starting at text[pos], or 0 if there is none or it
/// runs straight into other word characters.
std::size_t number_length(std::string_view text, std::size_t pos) {
    std::size_t p = pos;
    if (p < text.size() && (text[p] == '+' || text[p] == '-')) ++p;
    if (p >= text.size() ||
        !(std::isdigit(static_cast<unsigned char>(text[p])) || text[p] == '.')) {
        return 0;
    }
    double ignored = 0.0;
    auto [end, ec] = std::from_chars(text.data() + p, text.data() + text.size(), ignored);
    if (ec != std::errc{} && ec != std::errc::result_out_of_range) return 0;
    const auto stop = static_cast<std::size_t>(end - text.data());
    if (stop < text.size()) {
        const unsigned char next = static_cast<unsigned char>(text[stop]);
        if (std::isalnum(next) || next == '.' || next == '_') return 0;
    }
    return stop - pos;
}

class Fd {
public:
    explicit Fd(int fd = -1) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    int get() const { return fd_; }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_;
};

}  // namespace

std::string patch_anisotropy(std::string_view netlist, double h_k) {
    if (!std::isfinite(h_k)) throw DomainError("anisotropy value must be finite");
    const std::string replacement = text::format_double(h_k);

    std::string out;
    out.reserve(netlist.size() + 32);
    std::size_t copied = 0;
    std::size_t hits = 0;
    for (auto pos = netlist.find(kAnisotropyToken); pos != std::string_view::npos;
         pos = netlist.find(kAnisotropyToken, pos)) {
        std::size_t num = pos + kAnisotropyToken.size();
        while (num < netlist.size() && (netlist[num] == ' ' || netlist[num] == '\t')) ++num;
        const auto len = number_length(netlist, num);
        if (len == 0) {
            throw ParseError("malformed number after \"HK= \"", line_of(netlist, pos));
        }
        out.append(netlist.substr(copied, num - copied));
        out.append(replacement);
        copied = num + len;
        pos = copied;
        ++hits;
    }
    if (hits == 0) {
        throw ParseError("netlist has no \"HK= \" parameter to patch", 0);
    }
    out.append(netlist.substr(copied));
    return out;
}

void SimJob::validate() const {
    if (command_template.empty()) throw DomainError("simulator command is empty");
    std::size_t placeholders = 0;
    for (const auto& arg : command_template) {
        for (auto p = arg.find(kNetlistPlaceholder); p != std::string::npos;
             p = arg.find(kNetlistPlaceholder, p + 1)) {
            ++placeholders;
        }
    }
    if (placeholders != 1) {
        throw DomainError("simulator command must contain exactly one {netlist} placeholder");
    }
    if (timeout.count() <= 0) throw DomainError("simulator timeout must be > 0");
}

std::vector<std::string> SimJob::argv() const {
    std::vector<std::string> args = command_template;
    for (auto& arg : args) {
        if (auto p = arg.find(kNetlistPlaceholder); p != std::string::npos) {
            arg.replace(p, kNetlistPlaceholder.size(), netlist_path.string());
        }
    }
    return args;
}

std::vector<std::string> tokenize_command(std::string_view command) {
    std::vector<std::string> out;
    std::string current;
    bool in_token = false;
    char quote = 0;
    for (char c : command) {
        if (quote != 0) {
            if (c == quote) {
                quote = 0;
            } else {
                current.push_back(c);
            }
        } else if (c == '\'' || c == '"') {
            quote = c;
            in_token = true;
        } else if (c == ' ' || c == '\t' || c == '\n') {
            if (in_token) out.push_back(std::move(current));
            current.clear();
            in_token = false;
        } else {
            current.push_back(c);
            in_token = true;
        }
    }
    if (quote != 0) throw DomainError("unterminated quote in command");
    if (in_token) out.push_back(std::move(current));
    return out;
}

RunResult run_external(const SimJob& job) {
    job.validate();
    const auto args = job.argv();

    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) {
        throw EnvironmentError(std::string("pipe: ") + std::strerror(errno));
    }
    Fd read_end(fds[0]);
    Fd write_end(fds[1]);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, write_end.get(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, write_end.get(), STDERR_FILENO);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    // own process group so a timeout can kill anything the simulator forked
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    pid_t pid = 0;
    const int rc = ::posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) {
        throw EnvironmentError("cannot start simulator '" + args[0] + "': " + std::strerror(rc));
    }
    write_end.reset();

    RunResult result;
    const auto deadline = std::chrono::steady_clock::now() + job.timeout;
    bool timed_out = false;
    char buf[4096];
    while (true) {
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd pfd{read_end.get(), POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (ready == 0) continue;
        const ssize_t n = ::read(read_end.get(), buf, sizeof buf);
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (n == 0) break;
        result.output.append(buf, static_cast<std::size_t>(n));
    }

    if (timed_out) ::kill(-pid, SIGKILL);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }

    text::write_file_atomic(job.log_path, result.output);

    if (timed_out) {
        throw TimeoutError("simulator timed out; log at " + job.log_path.string(),
                           job.log_path.string(), result.output);
    }
    if (WIFEXITED(status)) {
        result.exit_status = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_status = 128 + WTERMSIG(status);
    }
    if (result.exit_status != 0) {
        throw SimulatorError("simulator exited with status " + std::to_string(result.exit_status) +
                                 "; log at " + job.log_path.string(),
                             job.log_path.string(), result.output);
    }
    return result;
}

std::vector<VoltagePoint> extract_output_voltages(std::string_view raw, std::string_view marker) {
    std::vector<VoltagePoint> points;
    const auto all = text::lines(raw);
    for (std::size_t n = 0; n < all.size(); ++n) {
        const auto fields = text::split_whitespace(all[n]);
        if (fields.empty() || fields.front() != marker) continue;
        if (fields.size() != 3) {
            throw ParseError("expected '" + std::string(marker) + " <v_in> <v_out>'", n + 1);
        }
        const auto v_in = text::parse_double(fields[1]);
        const auto v_out = text::parse_double(fields[2]);
        if (!v_in || !v_out) {
            throw ParseError("non-numeric voltage on marker line", n + 1);
        }
        points.push_back({*v_in, *v_out, std::nullopt});
    }
    if (points.empty()) {
        throw EmptyResultError("simulator output contains no '" + std::string(marker) + "' lines");
    }
    return points;
}

std::string format_marker_lines(std::span<const VoltagePoint> points, std::string_view marker) {
    std::string out;
    for (const auto& p : points) {
        out.append(marker);
        out.push_back(' ');
        out.append(text::format_double(p.v_in));
        out.push_back(' ');
        out.append(text::format_double(p.v_out));
        out.push_back('\n');
    }
    return out;
}

std::vector<VoltagePoint> simulate_internal(const EnergyBarrier& e_b, const PbitElectrical& elec,
                                            std::span<const double> v_grid,
                                            std::size_t samples_per_point, Rng& rng,
                                            double attempt_rate) {
    elec.validate();
    if (v_grid.empty()) throw DomainError("voltage grid is empty");

    std::vector<VoltagePoint> points;
    points.reserve(v_grid.size());
    for (const double v_in : v_grid) {
        double p = 0.0;
        if (samples_per_point == kExactSamples) {
            p = steady_state_p_high(v_in, e_b, elec);
        } else {
            const double drive = normalized_drive(v_in, elec);
            double dt = max_time_step(drive, e_b, attempt_rate);
            if (!std::isfinite(dt)) dt = kMaxStepProbability / attempt_rate;
            const auto trace =
                telegraph_trace_drive(drive, e_b, samples_per_point, dt, rng, attempt_rate);
            const auto highs = std::count(trace.begin(), trace.end(), std::uint8_t{1});
            p = static_cast<double>(highs) / static_cast<double>(samples_per_point);
        }
        points.push_back({v_in, p * elec.v_dd, p});
    }
    return points;
}

}  // namespace pbitsim::spice
