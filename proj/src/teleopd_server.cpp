// Copyright 2026 The nptray Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nptray/teleopd_server.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "nptray/error.hpp"

namespace nptray::teleop {
namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

}  // namespace

class Connection;

struct Server::Impl {
  Impl(const ExperimentConfig& config, const TeleopOptions& opt, const ServerOptions& so);

  void accept();
  void on_message(const std::shared_ptr<Connection>& from, const std::string& text);
  void on_close(const Connection* c);
  void broadcast(const std::string& frame);
  void control();
  void publish(const Frame& f);

  ServerOptions so;
  Session session;
  Inbox inbox;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread net_thread;
  std::thread ctl_thread;
  std::atomic<bool> stopping{false};
  bool started = false;
  bool stopped = false;

  std::mutex wake_mu;
  std::condition_variable wake;
  unsigned long pushes = 0;

  std::mutex conns_mu;
  std::vector<std::weak_ptr<Connection>> conns;
  const Connection* steerer = nullptr;  // network thread only

  mutable std::mutex stats_mu;
  ServerStats stats;
  std::vector<double> solve_ms;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Server::Impl& server, std::size_t capacity)
      : ws_(std::move(socket)), server_(server), queue_(capacity) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->close();
      self->accepted_ = true;
      self->read();
      self->flush();
    });
  }

  /// Any thread.
  void send(std::string msg) {
    queue_.push(std::move(msg));
    net::post(ws_.get_executor(), [self = shared_from_this()] { self->flush(); });
  }

  bool closed() const { return closed_; }

 private:
  void read() {
    ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const std::string text = beast::buffers_to_string(self->buf_.data());
      self->buf_.consume(self->buf_.size());
      self->server_.on_message(self, text);
      self->read();
    });
  }

  // Network thread only; at most one write in flight.
  void flush() {
    if (!accepted_ || writing_ || closed_) return;
    std::optional<std::string> next = queue_.pop();
    if (!next) return;
    out_ = std::move(*next);
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(out_), [self = shared_from_this()](beast::error_code ec,
                                                                   std::size_t) {
      self->writing_ = false;
      if (ec) return self->close();
      self->flush();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    server_.on_close(this);
  }

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl& server_;
  beast::flat_buffer buf_;
  FrameQueue queue_;
  std::string out_;
  bool accepted_ = false;
  bool writing_ = false;
  std::atomic<bool> closed_{false};
};

Server::Impl::Impl(const ExperimentConfig& config, const TeleopOptions& opt,
                   const ServerOptions& so_)
    : so(so_),
      session(config, [&] {
        TeleopOptions o = opt;
        o.record = o.record || !so_.record_dir.empty();
        return o;
      }()),
      inbox(opt.lockstep),
      acceptor(ioc) {
  beast::error_code ec;
  const auto addr = net::ip::make_address(so.address, ec);
  if (ec) throw std::runtime_error("teleopd: bad address '" + so.address + "'");
  const tcp::endpoint ep(addr, so.port);
  acceptor.open(ep.protocol(), ec);
  if (!ec) acceptor.bind(ep, ec);
  if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw std::runtime_error("teleopd: cannot listen on " + so.address + ":" +
                             std::to_string(so.port) + ": " + ec.message());
  }
}

void Server::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    auto c = std::make_shared<Connection>(std::move(socket), *this,
                                          session.options().queue_capacity);
    {
      std::lock_guard lock(conns_mu);
      std::erase_if(conns, [](const auto& w) { return w.expired() || w.lock()->closed(); });
      conns.push_back(c);
    }
    c->start();
    accept();
  });
}

void Server::Impl::on_message(const std::shared_ptr<Connection>& from, const std::string& text) {
  Command cmd;
  try {
    cmd = parse_message(text);
  } catch (const ProtocolError& e) {
    from->send(error_reply(e.what()));
    return;
  }
  if (steerer == nullptr) steerer = from.get();
  if (steerer != from.get()) {
    from->send(error_reply("another client is steering"));
    return;
  }
  {
    std::lock_guard lock(wake_mu);
    inbox.push(std::move(cmd));
    ++pushes;
  }
  wake.notify_one();
}

void Server::Impl::on_close(const Connection* c) {
  if (steerer == c) steerer = nullptr;
}

void Server::Impl::broadcast(const std::string& frame) {
  std::lock_guard lock(conns_mu);
  for (const auto& w : conns) {
    if (auto c = w.lock(); c && !c->closed()) c->send(frame);
  }
}

void Server::Impl::publish(const Frame& f) {
  broadcast(session.frame_json(f));
  std::lock_guard lock(stats_mu);
  ++stats.frames;
  solve_ms.push_back(f.cycle.solve_ms);
}

void Server::Impl::control() {
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(session.config().dt));
  if (inbox.lockstep()) {
    unsigned long seen = 0;
    while (!stopping) {
      {
        std::unique_lock lock(wake_mu);
        wake.wait(lock, [&] { return stopping || pushes != seen; });
        seen = pushes;
      }
      while (!stopping) {
        std::optional<std::vector<Command>> cmds = inbox.take();
        if (!cmds) break;
        for (const Command& c : *cmds) session.apply(c);
        publish(session.step());
      }
    }
    return;
  }
  Clock::time_point next = Clock::now();
  while (!stopping) {
    if (std::optional<std::vector<Command>> cmds = inbox.take()) {
      for (const Command& c : *cmds) session.apply(c);
    }
    publish(session.step());
    next += period;
    const Clock::time_point now = Clock::now();
    if (now > next) {
      // Late: restart the schedule rather than burst to catch up.
      std::lock_guard lock(stats_mu);
      ++stats.overruns;
      next = now;
      continue;
    }
    std::unique_lock lock(wake_mu);
    wake.wait_until(lock, next, [&] { return stopping.load(); });
  }
}

Server::Server(const ExperimentConfig& config, const TeleopOptions& opt,
               const ServerOptions& server)
    : impl_(std::make_unique<Impl>(config, opt, server)) {}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
  if (impl_->started) return;
  impl_->started = true;
  impl_->accept();
  impl_->net_thread = std::thread([this] { impl_->ioc.run(); });
  impl_->ctl_thread = std::thread([this] { impl_->control(); });
}

void Server::stop() {
  if (!impl_ || impl_->stopped) return;
  impl_->stopped = true;
  {
    std::lock_guard lock(impl_->wake_mu);
    impl_->stopping = true;
  }
  impl_->wake.notify_all();
  if (impl_->ctl_thread.joinable()) impl_->ctl_thread.join();
  impl_->ioc.stop();
  if (impl_->net_thread.joinable()) impl_->net_thread.join();
  if (!impl_->so.record_dir.empty()) impl_->session.write_record(impl_->so.record_dir);
}

void Server::run_until_signal() {
  start();
  net::io_context sig_ctx;
  net::signal_set signals(sig_ctx, SIGINT, SIGTERM);
  signals.async_wait([](beast::error_code, int) {});
  sig_ctx.run();
  stop();
}

ServerStats Server::stats() const {
  std::lock_guard lock(impl_->stats_mu);
  ServerStats s = impl_->stats;
  std::vector<double> ms = impl_->solve_ms;
  if (!ms.empty()) {
    double sum = 0.0;
    for (double v : ms) sum += v;
    s.mean_solve_ms = sum / static_cast<double>(ms.size());
    const std::size_t k = static_cast<std::size_t>(0.99 * static_cast<double>(ms.size() - 1));
    std::nth_element(ms.begin(), ms.begin() + k, ms.end());
    s.p99_solve_ms = ms[k];
  }
  return s;
}

ServerOptions parse_bind(const std::string& bind) {
  const std::size_t colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == bind.size()) {
    throw ConfigError("bind", "expected host:port, got '" + bind + "'");
  }
  ServerOptions so;
  so.address = bind.substr(0, colon);
  const std::string port = bind.substr(colon + 1);
  std::size_t used = 0;
  long p = -1;
  try {
    p = std::stol(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port.size() || p < 0 || p > 65535) {
    throw ConfigError("bind", "bad port '" + port + "'");
  }
  so.port = static_cast<std::uint16_t>(p);
  return so;
}

}  // namespace nptray::teleop
