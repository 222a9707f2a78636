#include "mimictree/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "mimictree/errors.hpp"

namespace mimictree {

namespace {

double parse_label(const std::string& line, std::size_t row, const std::string& origin) {
    const char* begin = line.data();
    const char* end = begin + line.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::general);
    if (ec != std::errc{} || ptr != end || begin == end) {
        throw oracle_error(origin + ": cannot parse label for row " + std::to_string(row) +
                           ": '" + line + "'");
    }
    if (!std::isfinite(value)) {
        throw oracle_error(origin + ": non-finite label for row " + std::to_string(row));
    }
    return value;
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

class Pipe {
public:
    int fds[2] = {-1, -1};
    Pipe() {
        if (::pipe(fds) != 0) throw oracle_error("cannot create pipe for teacher subprocess");
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) {
            ::close(fds[0]);
            fds[0] = -1;
        }
    }
    void close_write() {
        if (fds[1] >= 0) {
            ::close(fds[1]);
            fds[1] = -1;
        }
    }
};

std::vector<double> run_subprocess(const std::string& command, const Dataset& rows) {
    const std::size_t n = rows.rows();
    const std::size_t p = rows.n_features();

    // A teacher that exits early would otherwise kill us with SIGPIPE
    // before we can report its exit status.
    ::signal(SIGPIPE, SIG_IGN);

    Pipe to_child;
    Pipe from_child;
    const pid_t pid = ::fork();
    if (pid < 0) throw oracle_error("fork failed for teacher subprocess");
    if (pid == 0) {
        ::dup2(to_child.fds[0], STDIN_FILENO);
        ::dup2(from_child.fds[1], STDOUT_FILENO);
        to_child.close_read();
        to_child.close_write();
        from_child.close_read();
        from_child.close_write();
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    to_child.close_read();
    from_child.close_write();

    // Feed rows from a separate thread so a teacher that streams answers
    // back while reading cannot deadlock either pipe. The thread owns the
    // write end and closes it after the last row, signalling EOF.
    const int write_fd = to_child.fds[1];
    to_child.fds[1] = -1;
    std::thread writer([&rows, write_fd, n, p] {
        std::string buf;
        buf.reserve(1 << 16);
        buf = "n_features=" + std::to_string(p) + "\n";
        auto flush = [&] {
            std::size_t off = 0;
            while (off < buf.size()) {
                const ssize_t w = ::write(write_fd, buf.data() + off, buf.size() - off);
                if (w <= 0) return false; // reader reports the failure
                off += static_cast<std::size_t>(w);
            }
            buf.clear();
            return true;
        };
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                if (j > 0) buf.push_back(',');
                append_double(buf, rows.columns[j][i]);
            }
            buf.push_back('\n');
            if (buf.size() >= (1 << 16) && !flush()) {
                ::close(write_fd);
                return;
            }
        }
        flush();
        ::close(write_fd);
    });

    std::vector<double> labels;
    labels.reserve(n);
    std::string pending;
    std::string extra_output;
    char chunk[4096];
    try {
        while (true) {
            const ssize_t got = ::read(from_child.fds[0], chunk, sizeof chunk);
            if (got <= 0) break;
            pending.append(chunk, static_cast<std::size_t>(got));
            std::size_t start = 0;
            while (true) {
                const auto nl = pending.find('\n', start);
                if (nl == std::string::npos) break;
                std::string line = pending.substr(start, nl - start);
                start = nl + 1;
                if (labels.size() < n) {
                    labels.push_back(
                        parse_label(line, labels.size(), "teacher '" + command + "'"));
                } else if (!line.empty()) {
                    extra_output = line;
                }
            }
            pending.erase(0, start);
        }
        writer.join();
        from_child.close_read();
    } catch (...) {
        // Tear the pipes down so both the child and the writer unblock,
        // then reap before propagating the protocol error.
        from_child.close_read();
        writer.join();
        int status = 0;
        ::waitpid(pid, &status, 0);
        throw;
    }

    int status = 0;
    ::waitpid(pid, &status, 0);
    const bool clean_exit = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    if (!clean_exit) {
        throw oracle_error("teacher '" + command + "' exited with status " +
                           std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) +
                           " after " + std::to_string(labels.size()) + " of " +
                           std::to_string(n) + " labels");
    }
    if (!pending.empty() && labels.size() < n) {
        labels.push_back(parse_label(pending, labels.size(), "teacher '" + command + "'"));
    }
    if (labels.size() != n || !extra_output.empty()) {
        const std::size_t seen = labels.size() + (extra_output.empty() ? 0 : 1);
        throw oracle_error("teacher '" + command + "' returned " + std::to_string(seen) +
                           " labels for " + std::to_string(n) + " rows (first mismatch at row " +
                           std::to_string(std::min(seen, n)) + ")");
    }
    return labels;
}

} // namespace

OracleClient OracleClient::aligned_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw oracle_error("cannot open labels file '" + path + "'");
    OracleClient client(mode_t::aligned_file, path);
    std::string line;
    while (std::getline(file, line)) {
        if (line.empty() && file.peek() == EOF) break;
        client.labels_.push_back(parse_label(line, client.labels_.size(), "'" + path + "'"));
    }
    return client;
}

OracleClient OracleClient::subprocess(const std::string& command) {
    if (command.empty()) throw config_error("teacher command is empty");
    return OracleClient(mode_t::subprocess, command);
}

std::vector<double> OracleClient::query(const Dataset& rows) const {
    rows.check_consistent();
    if (mode_ == mode_t::aligned_file) {
        if (labels_.size() != rows.rows()) {
            throw oracle_error("labels file '" + spec_ + "' holds " +
                               std::to_string(labels_.size()) + " labels for " +
                               std::to_string(rows.rows()) + " rows");
        }
        return labels_;
    }
    return run_subprocess(spec_, rows);
}

} // namespace mimictree
