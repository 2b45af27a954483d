#include "rfidtrace/sync/channel.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

namespace rfidtrace::sync {

void write_message(ByteChannel& ch, const Message& m) { ch.write(encode_message(m)); }

namespace {

void read_exact(ByteChannel& ch, std::uint8_t* out, std::size_t n, std::chrono::milliseconds timeout) {
  std::size_t got = 0;
  while (got < n) got += ch.read(out + got, n - got, timeout);
}

}  // namespace

Message read_message(ByteChannel& ch, std::chrono::milliseconds timeout, Bytes* raw) {
  std::uint8_t head[5];
  read_exact(ch, head, sizeof head, timeout);
  const auto len = get_le<std::uint32_t>(ByteView(head, 4), 0);
  if (len == 0 || len > kMaxMessage) throw Error(Errc::Protocol, "bad message length " + std::to_string(len));
  Message m;
  m.type = static_cast<MsgType>(head[4]);
  m.body.resize(len - 1);
  if (!m.body.empty()) read_exact(ch, m.body.data(), m.body.size(), timeout);
  if (raw) {
    raw->assign(head, head + 5);
    append(*raw, m.body);
  }
  return m;
}

// --- pipe -----------------------------------------------------------------

struct PipeLink::State {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::uint8_t> to_b;  // written by a
  std::deque<std::uint8_t> to_a;  // written by b
  bool broken = false;
  std::uint64_t total = 0;
  std::optional<std::uint64_t> cut_at;
};

namespace {

class PipeEnd : public ByteChannel {
 public:
  PipeEnd(std::shared_ptr<PipeLink::State> s, bool is_a) : s_(std::move(s)), is_a_(is_a) {}
  ~PipeEnd() override { close(); }

  void write(ByteView data) override {
    std::lock_guard lock(s_->mutex);
    if (s_->broken) throw Error(Errc::DeviceUnreachable, "link down");
    auto& q = is_a_ ? s_->to_b : s_->to_a;
    std::size_t n = data.size();
    bool cut = false;
    if (s_->cut_at) {
      const auto room = *s_->cut_at > s_->total ? *s_->cut_at - s_->total : 0;
      if (room < n) {
        n = static_cast<std::size_t>(room);
        cut = true;
      }
    }
    q.insert(q.end(), data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n));
    s_->total += n;
    written_ += n;
    if (cut) s_->broken = true;
    s_->cv.notify_all();
    if (cut) throw Error(Errc::DeviceUnreachable, "link cut");
  }

  std::size_t read(std::uint8_t* out, std::size_t max, std::chrono::milliseconds timeout) override {
    std::unique_lock lock(s_->mutex);
    auto& q = is_a_ ? s_->to_a : s_->to_b;
    if (!s_->cv.wait_for(lock, timeout, [&] { return !q.empty() || s_->broken; })) {
      throw Error(Errc::DeviceUnreachable, "timed out waiting for peer");
    }
    if (q.empty()) throw Error(Errc::DeviceUnreachable, "link down");
    const auto n = std::min(max, q.size());
    std::copy_n(q.begin(), n, out);
    q.erase(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(n));
    read_ += n;
    return n;
  }

  bool alive() const override {
    std::lock_guard lock(s_->mutex);
    return !s_->broken;
  }

  void close() override {
    std::lock_guard lock(s_->mutex);
    s_->broken = true;
    s_->cv.notify_all();
  }

 private:
  std::shared_ptr<PipeLink::State> s_;
  bool is_a_;
};

}  // namespace

PipeLink::PipeLink() : state_(std::make_shared<State>()) {}

std::unique_ptr<ByteChannel> PipeLink::end_a() { return std::make_unique<PipeEnd>(state_, true); }
std::unique_ptr<ByteChannel> PipeLink::end_b() { return std::make_unique<PipeEnd>(state_, false); }

void PipeLink::cut_after(std::uint64_t total) {
  std::lock_guard lock(state_->mutex);
  state_->cut_at = total;
  if (state_->total >= total) {
    state_->broken = true;
    state_->cv.notify_all();
  }
}

void PipeLink::cut_now() {
  std::lock_guard lock(state_->mutex);
  state_->broken = true;
  state_->cv.notify_all();
}

std::uint64_t PipeLink::bytes_transferred() const {
  std::lock_guard lock(state_->mutex);
  return state_->total;
}

// --- sockets --------------------------------------------------------------

SocketChannel::SocketChannel(int fd) : fd_(fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

SocketChannel::~SocketChannel() {
  const int fd = fd_.exchange(-1);
  if (fd >= 0) ::close(fd);
}

void SocketChannel::write(ByteView data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const int fd = fd_.load();
    if (fd < 0) throw Error(Errc::DeviceUnreachable, "socket closed");
    const auto n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::DeviceUnreachable, std::string("send: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
    written_ += static_cast<std::uint64_t>(n);
  }
}

std::size_t SocketChannel::read(std::uint8_t* out, std::size_t max, std::chrono::milliseconds timeout) {
  for (;;) {
    const int fd = fd_.load();
    if (fd < 0) throw Error(Errc::DeviceUnreachable, "socket closed");
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw Error(Errc::DeviceUnreachable, std::string("poll: ") + std::strerror(errno));
    if (r == 0) throw Error(Errc::DeviceUnreachable, "timed out waiting for peer");
    const auto n = ::recv(fd, out, max, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw Error(Errc::DeviceUnreachable, std::string("recv: ") + std::strerror(errno));
    if (n == 0) throw Error(Errc::DeviceUnreachable, "peer closed the connection");
    read_ += static_cast<std::uint64_t>(n);
    return static_cast<std::size_t>(n);
  }
}

bool SocketChannel::alive() const {
  const int fd = fd_.load();
  if (fd < 0) return false;
  pollfd p{fd, POLLRDHUP, 0};
  if (::poll(&p, 1, 0) < 0) return false;
  return (p.revents & (POLLRDHUP | POLLHUP | POLLERR | POLLNVAL)) == 0;
}

void SocketChannel::close() {
  const int fd = fd_.load();
  if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

namespace {

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw Error(Errc::DeviceUnreachable, "endpoint must be host:port, got '" + endpoint + "'");
  }
  return {endpoint.substr(0, colon), endpoint.substr(colon + 1)};
}

}  // namespace

std::unique_ptr<ByteChannel> connect_tcp(const std::string& endpoint, std::chrono::milliseconds timeout) {
  const auto [host, port] = split_endpoint(endpoint);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw Error(Errc::DeviceUnreachable, endpoint + ": " + ::gai_strerror(rc));
  }
  std::string last = "no address";
  for (auto* ai = res; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC | SOCK_NONBLOCK, ai->ai_protocol);
    if (fd < 0) continue;
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      rc = ::poll(&p, 1, static_cast<int>(timeout.count())) == 1 ? 0 : -1;
      int err = rc == 0 ? 0 : ETIMEDOUT;
      socklen_t len = sizeof err;
      if (rc == 0) ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      if (err != 0) {
        errno = err;
        rc = -1;
      }
    }
    if (rc == 0) {
      const int flags = ::fcntl(fd, F_GETFL);
      ::fcntl(fd, F_SETFL, flags & ~O_NONBLOCK);
      ::freeaddrinfo(res);
      return std::make_unique<SocketChannel>(fd);
    }
    last = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw Error(Errc::DeviceUnreachable, endpoint + ": " + last);
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) : fd_(-1) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const auto port_text = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port_text.c_str(), &hints, &res);
      rc != 0) {
    throw Error(Errc::Io, host + ": " + ::gai_strerror(rc));
  }
  std::string last = "no address";
  for (auto* ai = res; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) {
      sockaddr_storage ss{};
      socklen_t len = sizeof ss;
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&ss), &len);
      port_ = ntohs(ss.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port
                                             : reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
      fd_ = fd;
      break;
    }
    last = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw Error(Errc::Io, "cannot listen on " + host + ":" + port_text + ": " + last);
}

TcpListener::~TcpListener() {
  const int fd = fd_.exchange(-1);
  if (fd >= 0) ::close(fd);
}

std::unique_ptr<ByteChannel> TcpListener::accept() {
  for (;;) {
    const int lfd = fd_.load();
    if (lfd < 0) return nullptr;
    const int fd = ::accept4(lfd, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) return std::make_unique<SocketChannel>(fd);
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return nullptr;
  }
}

void TcpListener::close() {
  const int fd = fd_.load();
  if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

}  // namespace rfidtrace::sync
