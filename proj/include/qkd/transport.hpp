#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "qkd/wire.hpp"

namespace qkd::wire {

/// In-process ordered queue pair; the default transport for tests and
/// single-process runs.
class QueueTransport : public Transport {
public:
    void send(const Message& m) override;
    Message recv() override;

    /// Two connected endpoints.
    static std::pair<std::unique_ptr<QueueTransport>, std::unique_ptr<QueueTransport>> make_pair();

private:
    struct Queue {
        std::mutex mu;
        std::condition_variable cv;
        std::deque<Message> items;
        bool closed = false;

        void push(Message m);
        Message pop();
        void close();
    };

    QueueTransport(std::shared_ptr<Queue> in, std::shared_ptr<Queue> out)
        : in_(std::move(in)), out_(std::move(out)) {}

    std::shared_ptr<Queue> in_;
    std::shared_ptr<Queue> out_;

public:
    ~QueueTransport() override;
};

/// Byte-stream transport over a connected TCP socket, using the framed
/// message layout (4-byte big-endian payload length, type byte, payload).
class SocketTransport : public Transport {
public:
    /// Listens on addr ("host:port", host may be empty for any) and accepts
    /// one connection.
    static std::unique_ptr<SocketTransport> listen(const std::string& addr);
    /// Connects to addr ("host:port"), retrying briefly while the peer
    /// comes up.
    static std::unique_ptr<SocketTransport> connect(const std::string& addr);

    void send(const Message& m) override;
    Message recv() override;

    ~SocketTransport() override;

    SocketTransport(const SocketTransport&) = delete;
    SocketTransport& operator=(const SocketTransport&) = delete;

private:
    explicit SocketTransport(int fd) : fd_(fd) {}
    int fd_ = -1;
};

} // namespace qkd::wire
