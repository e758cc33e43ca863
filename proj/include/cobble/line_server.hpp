#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cobble/transaction.hpp"

namespace cobble {

// Newline-delimited request/response protocol over TCP, one thread per
// connection:
//   BEGIN                          -> OK <txnId> <st>
//   READ <txnId> <key>             -> OK <value>
//   UPD <txnId> <key> ASSIGN|INCR <amount> -> OK
//   COMMIT <txnId>                 -> OK <ct> | CONFLICT
//   ABORT <txnId>                  -> OK
// Anything else yields "ERR <reason>" and the connection stays open.
class LineServer {
public:
    // Transactions begun on one connection; aborted when it closes.
    struct Session {
        std::set<std::string> open;
    };

    explicit LineServer(TransactionManager& tm) : tm_(tm) {}
    ~LineServer();
    LineServer(const LineServer&) = delete;
    LineServer& operator=(const LineServer&) = delete;

    // Handles one request line (without its LF) and returns the response line.
    std::string handle_line(std::string_view line, Session& session);

    // Binds and starts accepting in the background. Port 0 picks a free
    // port; the bound port is returned. Throws IoError.
    std::uint16_t start(const std::string& host, std::uint16_t port);
    // Stops accepting, shuts connections down and joins their threads.
    void stop();
    // Blocks until stop() is called from elsewhere.
    void wait();

    [[nodiscard]] std::uint16_t port() const noexcept { return port_; }

private:
    void accept_loop();
    void serve(int fd);

    TransactionManager& tm_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex conn_mu_;
    std::vector<std::thread> conn_threads_;
    std::set<int> conn_fds_;
};

// Splits "host:port"; throws std::invalid_argument.
std::pair<std::string, std::uint16_t> parse_addr(std::string_view addr);

}  // namespace cobble
