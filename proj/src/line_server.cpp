#include "cobble/line_server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <charconv>
#include <cstring>
#include <sstream>

namespace cobble {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        const auto j = line.find(' ', i);
        const auto end = j == std::string_view::npos ? line.size() : j;
        if (end > i) out.push_back(line.substr(i, end - i));
        i = end;
    }
    return out;
}

bool parse_i64(std::string_view s, std::int64_t& out) {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_addr(std::string_view addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("address must be HOST:PORT");
    const auto port_s = addr.substr(colon + 1);
    unsigned port = 0;
    auto [p, ec] = std::from_chars(port_s.data(), port_s.data() + port_s.size(), port);
    if (ec != std::errc() || p != port_s.data() + port_s.size() || port > 65535) {
        throw std::invalid_argument("bad port in address: " + std::string(addr));
    }
    return {std::string(addr.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

std::string LineServer::handle_line(std::string_view line, Session& session) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto w = split(line);
    if (w.empty()) return "ERR empty request";
    try {
        const auto& verb = w[0];
        if (verb == "BEGIN") {
            if (w.size() != 1) return "ERR usage: BEGIN";
            const auto id = tm_.begin();
            session.open.insert(id);
            return "OK " + id + " " + std::to_string(tm_.descriptor(id).st.value);
        }
        if (verb == "READ") {
            if (w.size() != 3) return "ERR usage: READ <txnId> <key>";
            return "OK " + std::to_string(tm_.read(std::string(w[1]), Key(std::string(w[2]))));
        }
        if (verb == "UPD") {
            std::int64_t amount = 0;
            if (w.size() != 5 || (w[3] != "ASSIGN" && w[3] != "INCR") || !parse_i64(w[4], amount)) {
                return "ERR usage: UPD <txnId> <key> ASSIGN|INCR <amount>";
            }
            const Effect e = w[3] == "ASSIGN" ? Effect::assign(amount) : Effect::incr(amount);
            tm_.update(std::string(w[1]), Key(std::string(w[2])), e);
            return "OK";
        }
        if (verb == "COMMIT") {
            if (w.size() != 2) return "ERR usage: COMMIT <txnId>";
            const std::string id(w[1]);
            session.open.erase(id);
            const auto r = tm_.commit(id);
            return r.ok() ? "OK " + std::to_string(r.ct->value) : "CONFLICT";
        }
        if (verb == "ABORT") {
            if (w.size() != 2) return "ERR usage: ABORT <txnId>";
            const std::string id(w[1]);
            session.open.erase(id);
            tm_.abort(id);
            return "OK";
        }
        return "ERR unknown command " + std::string(verb);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (auto& c : msg) {
            if (c == '\n' || c == '\r') c = ' ';
        }
        return "ERR " + msg;
    }
}

LineServer::~LineServer() { stop(); }

std::uint16_t LineServer::start(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string port_s = std::to_string(port);
    if (::getaddrinfo(host.empty() ? nullptr : host.c_str(), port_s.c_str(), &hints, &res) != 0 || !res) {
        throw IoError("serve: cannot resolve " + host);
    }
    const int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        throw IoError(std::string("serve: socket: ") + std::strerror(errno));
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
        const std::string err = std::strerror(errno);
        ::freeaddrinfo(res);
        ::close(fd);
        throw IoError("serve: bind/listen " + host + ":" + port_s + ": " + err);
    }
    ::freeaddrinfo(res);

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    listen_fd_ = fd;
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    return port_;
}

void LineServer::accept_loop() {
    while (running_) {
        pollfd p{listen_fd_, POLLIN, 0};
        const int r = ::poll(&p, 1, 100);
        if (r <= 0) continue;
        const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) continue;
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        std::lock_guard lock(conn_mu_);
        if (!running_) {
            ::close(fd);
            break;
        }
        conn_fds_.insert(fd);
        conn_threads_.emplace_back([this, fd] { serve(fd); });
    }
}

void LineServer::serve(int fd) {
    Session session;
    std::string buf;
    char chunk[4096];
    for (;;) {
        const auto n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        buf.append(chunk, static_cast<std::size_t>(n));
        std::string out;
        std::size_t pos = 0;
        for (auto nl = buf.find('\n', pos); nl != std::string::npos; nl = buf.find('\n', pos)) {
            out += handle_line(std::string_view(buf).substr(pos, nl - pos), session);
            out += '\n';
            pos = nl + 1;
        }
        buf.erase(0, pos);
        if (!out.empty() && !send_all(fd, out)) break;
    }
    for (const auto& id : session.open) {
        try {
            tm_.abort(id);
        } catch (const Error&) {
        }
    }
    std::lock_guard lock(conn_mu_);
    if (conn_fds_.erase(fd) > 0) ::close(fd);
}

void LineServer::stop() {
    if (!running_.exchange(false)) return;
    if (acceptor_.joinable()) acceptor_.join();
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(conn_mu_);
        for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
        threads.swap(conn_threads_);
    }
    for (auto& t : threads) t.join();
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
}

void LineServer::wait() {
    while (running_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace cobble
