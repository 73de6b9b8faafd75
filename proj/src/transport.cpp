#include "qkd/transport.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

namespace qkd::wire {

void QueueTransport::Queue::push(Message m) {
    {
        std::lock_guard<std::mutex> lock(mu);
        if (closed) throw ProtocolError("transport closed");
        items.push_back(std::move(m));
    }
    cv.notify_one();
}

Message QueueTransport::Queue::pop() {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return !items.empty() || closed; });
    if (items.empty()) throw ProtocolError("transport closed by peer");
    Message m = std::move(items.front());
    items.pop_front();
    return m;
}

void QueueTransport::Queue::close() {
    {
        std::lock_guard<std::mutex> lock(mu);
        closed = true;
    }
    cv.notify_all();
}

void QueueTransport::send(const Message& m) { out_->push(m); }

Message QueueTransport::recv() { return in_->pop(); }

QueueTransport::~QueueTransport() {
    if (out_) out_->close();
}

std::pair<std::unique_ptr<QueueTransport>, std::unique_ptr<QueueTransport>>
QueueTransport::make_pair() {
    auto a_to_b = std::make_shared<Queue>();
    auto b_to_a = std::make_shared<Queue>();
    std::unique_ptr<QueueTransport> a(new QueueTransport(b_to_a, a_to_b));
    std::unique_ptr<QueueTransport> b(new QueueTransport(a_to_b, b_to_a));
    return {std::move(a), std::move(b)};
}

namespace {

struct AddrParts {
    std::string host;
    std::string port;
};

AddrParts split_addr(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos)
        throw ProtocolError("address must be host:port, got '" + addr + "'");
    AddrParts p;
    p.host = addr.substr(0, colon);
    p.port = addr.substr(colon + 1);
    if (p.port.empty()) throw ProtocolError("address missing port: '" + addr + "'");
    return p;
}

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        const ssize_t n = ::write(fd, data, len);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("socket write failed: ") + std::strerror(errno));
        }
        data += n;
        len -= static_cast<std::size_t>(n);
    }
}

void read_all(int fd, std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        const ssize_t n = ::read(fd, data, len);
        if (n == 0) throw ProtocolError("socket closed by peer");
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("socket read failed: ") + std::strerror(errno));
        }
        data += n;
        len -= static_cast<std::size_t>(n);
    }
}

int resolve_and(const std::string& host, const std::string& port, bool passive,
                int (*action)(int, const sockaddr*, socklen_t)) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port.c_str(), &hints, &res);
    if (rc != 0) throw ProtocolError(std::string("getaddrinfo: ") + gai_strerror(rc));

    int fd = -1;
    int saved_errno = 0;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) { saved_errno = errno; continue; }
        if (passive) {
            const int one = 1;
            ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        }
        if (action(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        saved_errno = errno;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0)
        throw ProtocolError(std::string(passive ? "bind" : "connect") + " failed: " +
                            std::strerror(saved_errno));
    return fd;
}

} // namespace

std::unique_ptr<SocketTransport> SocketTransport::listen(const std::string& addr) {
    const auto parts = split_addr(addr);
    const int lfd = resolve_and(parts.host, parts.port, true, ::bind);
    if (::listen(lfd, 1) != 0) {
        const int e = errno;
        ::close(lfd);
        throw ProtocolError(std::string("listen failed: ") + std::strerror(e));
    }
    const int fd = ::accept(lfd, nullptr, nullptr);
    ::close(lfd);
    if (fd < 0) throw ProtocolError(std::string("accept failed: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return std::unique_ptr<SocketTransport>(new SocketTransport(fd));
}

std::unique_ptr<SocketTransport> SocketTransport::connect(const std::string& addr) {
    const auto parts = split_addr(addr);
    // The peer may still be binding; retry for a few seconds.
    for (int attempt = 0;; ++attempt) {
        try {
            const int fd = resolve_and(parts.host.empty() ? "127.0.0.1" : parts.host,
                                       parts.port, false, ::connect);
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return std::unique_ptr<SocketTransport>(new SocketTransport(fd));
        } catch (const ProtocolError&) {
            if (attempt >= 50) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
    }
}

void SocketTransport::send(const Message& m) {
    const auto frame = encode_frame(m);
    write_all(fd_, frame.data(), frame.size());
}

Message SocketTransport::recv() {
    std::uint8_t header[5];
    read_all(fd_, header, sizeof header);
    const std::uint32_t len = (std::uint32_t(header[0]) << 24) | (std::uint32_t(header[1]) << 16) |
                              (std::uint32_t(header[2]) << 8) | std::uint32_t(header[3]);
    Message m;
    m.type = header[4];
    m.payload.resize(len);
    if (len > 0) read_all(fd_, m.payload.data(), len);
    return m;
}

SocketTransport::~SocketTransport() {
    if (fd_ >= 0) ::close(fd_);
}

} // namespace qkd::wire
