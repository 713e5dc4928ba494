#include "semiknock/external_model.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace semiknock {

using nlohmann::json;

ExternalModel::ExternalModel(const ExternalModelHandle& handle, int n_features)
    : handle_(handle), n_features_(n_features) {
    int to_pipe[2];
    int from_pipe[2];
    if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0) {
        throw std::runtime_error("external model: pipe() failed");
    }
    const int pid = fork();
    if (pid < 0) {
        throw std::runtime_error("external model: fork() failed");
    }
    if (pid == 0) {
        dup2(to_pipe[0], STDIN_FILENO);
        dup2(from_pipe[1], STDOUT_FILENO);
        close(to_pipe[0]);
        close(to_pipe[1]);
        close(from_pipe[0]);
        close(from_pipe[1]);
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(handle_.executable_path.c_str()));
        for (const auto& a : handle_.startup_args) {
            argv.push_back(const_cast<char*>(a.c_str()));
        }
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    child_pid_ = pid;
    to_child_ = to_pipe[1];
    from_child_ = from_pipe[0];
    close(to_pipe[0]);
    close(from_pipe[1]);

    json hello = {{"type", "hello"}, {"n_features", n_features_}};
    send_line(hello.dump());
    const json reply = json::parse(read_line());
    if (reply.value("type", "") != "ready") {
        shutdown();
        throw std::runtime_error("external model: handshake failed, got: " + reply.dump());
    }
}

ExternalModel::~ExternalModel() { shutdown(); }

void ExternalModel::shutdown() {
    if (to_child_ >= 0) {
        const std::string bye = json{{"type", "bye"}}.dump() + "\n";
        [[maybe_unused]] ssize_t rc = write(to_child_, bye.data(), bye.size());
        close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
    if (child_pid_ > 0) {
        int status = 0;
        if (waitpid(child_pid_, &status, WNOHANG) == 0) {
            kill(child_pid_, SIGTERM);
            waitpid(child_pid_, &status, 0);
        }
        child_pid_ = -1;
    }
}

void ExternalModel::send_line(const std::string& line) const {
    std::string out = line + "\n";
    std::size_t written = 0;
    while (written < out.size()) {
        const ssize_t rc = write(to_child_, out.data() + written, out.size() - written);
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw std::runtime_error("external model: write failed: " +
                                     std::string(std::strerror(errno)));
        }
        written += static_cast<std::size_t>(rc);
    }
}

std::string ExternalModel::read_line() const {
    const int timeout_ms = static_cast<int>(handle_.request_timeout_seconds * 1000.0);
    for (;;) {
        const std::size_t nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        struct pollfd pfd = {from_child_, POLLIN, 0};
        const int pr = poll(&pfd, 1, timeout_ms);
        if (pr == 0) {
            throw std::runtime_error("external model: timeout after " +
                                     std::to_string(handle_.request_timeout_seconds) + "s");
        }
        if (pr < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw std::runtime_error("external model: poll failed");
        }
        char chunk[4096];
        const ssize_t rc = read(from_child_, chunk, sizeof(chunk));
        if (rc <= 0) {
            throw std::runtime_error("external model: child closed its output stream");
        }
        buffer_.append(chunk, static_cast<std::size_t>(rc));
    }
}

Eigen::VectorXd ExternalModel::predict(const Eigen::MatrixXd& batch) const {
    if (batch.cols() != n_features_) {
        throw std::invalid_argument("external model: feature count mismatch");
    }
    json request;
    request["type"] = "predict";
    json rows = json::array();
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < batch.cols(); ++j) {
            row.push_back(batch(i, j));
        }
        rows.push_back(std::move(row));
    }
    request["inputs"] = std::move(rows);
    send_line(request.dump());

    json reply;
    try {
        reply = json::parse(read_line());
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("external model: malformed reply: ") + e.what());
    }
    if (reply.value("type", "") != "predictions" || !reply.contains("values") ||
        !reply["values"].is_array()) {
        throw std::runtime_error("external model: malformed reply: " + reply.dump());
    }
    const auto& values = reply["values"];
    if (static_cast<Eigen::Index>(values.size()) != batch.rows()) {
        throw std::runtime_error("external model: got " + std::to_string(values.size()) +
                                 " predictions for " + std::to_string(batch.rows()) + " rows");
    }
    Eigen::VectorXd out(batch.rows());
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        out[i] = values[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
}

Eigen::VectorXd external_predict(ExternalModel& model, const Eigen::MatrixXd& batch) {
    return model.predict(batch);
}

}  // namespace semiknock
