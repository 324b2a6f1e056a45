#include <cerrno>
#include <csignal>
#include <cstring>
#include <deque>
#include <map>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "pharmmt/translation.hpp"

namespace pharmmt::translation {

struct ExternalTranslator::Impl {
    std::vector<std::string> command;
    std::chrono::milliseconds timeout;
    pid_t pid = -1;
    int to_child = -1;
    int from_child = -1;
    std::string read_buffer;
    std::map<std::string, std::string> pending;  // id -> raw response line
    bool started = false;
    bool dead = false;

    ~Impl() { shutdown(); }

    void shutdown() {
        if (to_child >= 0) close(to_child);
        if (from_child >= 0) close(from_child);
        to_child = from_child = -1;
        if (pid > 0) {
            kill(pid, SIGTERM);
            int status = 0;
            waitpid(pid, &status, 0);
            pid = -1;
        }
    }

    bool start() {
        int in_pipe[2];   // parent -> child stdin
        int out_pipe[2];  // child stdout -> parent
        if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) return false;
        pid = fork();
        if (pid < 0) return false;
        if (pid == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            close(in_pipe[0]);
            close(in_pipe[1]);
            close(out_pipe[0]);
            close(out_pipe[1]);
            std::vector<char*> argv;
            for (auto& arg : command) argv.push_back(arg.data());
            argv.push_back(nullptr);
            execvp(argv[0], argv.data());
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        to_child = in_pipe[1];
        from_child = out_pipe[0];
        signal(SIGPIPE, SIG_IGN);
        started = true;
        return true;
    }

    bool write_line(const std::string& line) {
        std::string data = line + "\n";
        std::size_t off = 0;
        while (off < data.size()) {
            ssize_t n = write(to_child, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

    // Reads one full line within the deadline; empty optional on timeout/EOF.
    enum class ReadStatus { Line, Timeout, Closed };

    ReadStatus read_line(std::string* line, std::chrono::steady_clock::time_point deadline) {
        while (true) {
            auto newline = read_buffer.find('\n');
            if (newline != std::string::npos) {
                *line = read_buffer.substr(0, newline);
                read_buffer.erase(0, newline + 1);
                return ReadStatus::Line;
            }
            auto now = std::chrono::steady_clock::now();
            if (now >= deadline) return ReadStatus::Timeout;
            auto remaining =
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            pollfd pfd{from_child, POLLIN, 0};
            int ready = poll(&pfd, 1, static_cast<int>(remaining));
            if (ready < 0) {
                if (errno == EINTR) continue;
                return ReadStatus::Closed;
            }
            if (ready == 0) return ReadStatus::Timeout;
            char buf[4096];
            ssize_t n = read(from_child, buf, sizeof(buf));
            if (n <= 0) return ReadStatus::Closed;
            read_buffer.append(buf, static_cast<std::size_t>(n));
        }
    }
};

ExternalTranslator::ExternalTranslator(std::vector<std::string> command,
                                       std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
    impl_->command = std::move(command);
    impl_->timeout = timeout;
}

ExternalTranslator::~ExternalTranslator() = default;

std::variant<std::vector<Candidate>, ExternalError> ExternalTranslator::translate(
    std::string_view id, std::string_view source) {
    Impl& impl = *impl_;
    if (impl.dead) return ExternalError::Unreachable;
    if (!impl.started) {
        if (impl.command.empty() || !impl.start()) {
            impl.dead = true;
            return ExternalError::Unreachable;
        }
    }

    std::string request_id(id);
    if (request_id.empty()) request_id = "req";

    nlohmann::json request = {{"id", request_id}, {"source", std::string(source)}};
    if (!impl.write_line(request.dump())) {
        impl.dead = true;
        return ExternalError::Unreachable;
    }

    auto parse_response = [&](const std::string& line)
        -> std::variant<std::vector<Candidate>, ExternalError> {
        nlohmann::json reply = nlohmann::json::parse(line, nullptr, false);
        if (reply.is_discarded() || !reply.is_object() || !reply.contains("candidates") ||
            !reply["candidates"].is_array()) {
            return ExternalError::Malformed;
        }
        std::vector<Candidate> candidates;
        for (const auto& item : reply["candidates"]) {
            if (!item.is_object() || !item.contains("text") || !item["text"].is_string()) {
                return ExternalError::Malformed;
            }
            candidates.push_back(
                {item["text"].get<std::string>(), item.value("score", 0.0)});
        }
        return candidates;
    };

    // The response for this id may already have been buffered.
    if (auto it = impl.pending.find(request_id); it != impl.pending.end()) {
        auto line = it->second;
        impl.pending.erase(it);
        return parse_response(line);
    }

    auto deadline = std::chrono::steady_clock::now() + impl.timeout;
    while (true) {
        std::string line;
        auto status = impl.read_line(&line, deadline);
        if (status == Impl::ReadStatus::Timeout) return ExternalError::Timeout;
        if (status == Impl::ReadStatus::Closed) {
            impl.dead = true;
            return ExternalError::Unreachable;
        }
        nlohmann::json reply = nlohmann::json::parse(line, nullptr, false);
        if (reply.is_discarded() || !reply.is_object()) return ExternalError::Malformed;
        std::string reply_id = reply.value("id", std::string());
        if (reply_id == request_id) return parse_response(line);
        if (!reply_id.empty()) impl.pending.emplace(reply_id, line);  // out-of-order reply
    }
}

}  // namespace pharmmt::translation
