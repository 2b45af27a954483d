#include "rfidtrace/sync/device_agent.hpp"

#include <filesystem>

#include "rfidtrace/store/value.hpp"

namespace rfidtrace::sync {

DeviceAgent::DeviceAgent(CompactStore& store, std::chrono::milliseconds idle_timeout)
    : store_(store), idle_timeout_(idle_timeout) {}

void DeviceAgent::serve(ByteChannel& channel) {
  in_session_ = false;
  for (;;) {
    Message request;
    try {
      request = read_message(channel, idle_timeout_);
    } catch (const Error& e) {
      if (e.code() == Errc::Protocol) {
        try {
          write_message(channel, make_ack(Status::Protocol, e.detail()));
        } catch (const Error&) {
        }
      }
      return;
    }
    const auto response = handle(request);
    try {
      write_message(channel, response);
    } catch (const Error&) {
      return;
    }
  }
}

Message DeviceAgent::handle(const Message& request) {
  Message response;
  try {
    response = handle_inner(request);
  } catch (const Error& e) {
    Status s = Status::Rejected;
    switch (e.code()) {
      case Errc::NotFound: s = Status::NotFound; break;
      case Errc::QuotaExceeded: s = Status::QuotaExceeded; break;
      case Errc::Protocol: s = Status::Protocol; break;
      case Errc::Io: s = Status::Io; break;
      default: break;
    }
    response = make_ack(s, e.detail());
  } catch (const store::Error& e) {
    response = make_ack(Status::Rejected, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    response = make_ack(Status::Io, e.what());
  }
  if (in_session_ && request.type != MsgType::End) {
    digest_.add(encode_message(request));
    digest_.add(encode_message(response));
  }
  return response;
}

Message DeviceAgent::handle_inner(const Message& request) {
  BodyReader r(request.body);
  switch (request.type) {
    case MsgType::Hello: {
      const auto version = r.u16();
      const auto expected = r.str8();
      r.finish();
      if (version != kSyncVersion) {
        return make_ack(Status::Rejected, "unsupported protocol version " + std::to_string(version));
      }
      if (!expected.empty() && expected != store_.device_id()) {
        return make_ack(Status::Rejected, "this is device " + store_.device_id() + ", not " + expected);
      }
      return make_ack(Status::Ok, store_.device_id());
    }
    case MsgType::Begin: {
      const auto n = r.u8();
      std::vector<std::string> names;
      for (std::size_t i = 0; i < n; ++i) names.push_back(r.str8());
      r.finish();
      Manifest m;
      m.device_id = store_.device_id();
      for (auto& name : names) {
        ManifestEntry e;
        e.table = name;
        if (auto t = store_.table(name)) {
          e.present = true;
          e.revision = t->revision;
          e.modified_at = t->modified_at;
          e.base = store_.base(name);
          e.digest = content_digest(*t);
        }
        m.tables.push_back(std::move(e));
      }
      digest_.reset();
      in_session_ = true;
      return encode_manifest(m);
    }
    case MsgType::PushTable: {
      const auto name = r.str8();
      const auto image = r.blob();
      r.finish();
      auto t = from_compact(image);
      if (t.schema.name != name) throw Error(Errc::Protocol, "image for " + name + " holds " + t.schema.name);
      const auto revision = t.revision;
      store_.put_table(t, revision);
      return make_ack(Status::Ok);
    }
    case MsgType::PullTable: {
      const auto name = r.str8();
      r.finish();
      auto t = store_.table(name);
      if (!t) return make_ack(Status::NotFound, "device has no table " + name);
      const auto image = to_compact(*t).bytes;
      return BodyWriter().digest(blake2b(image)).blob(image).done(MsgType::Data);
    }
    case MsgType::SetBase: {
      const auto name = r.str8();
      const auto revision = r.u64();
      r.finish();
      store_.set_base(name, revision);
      return make_ack(Status::Ok);
    }
    case MsgType::End: {
      const auto theirs = r.digest();
      r.finish();
      const bool match = in_session_ && theirs == digest_.value();
      in_session_ = false;
      return match ? make_ack(Status::Ok) : make_ack(Status::Rejected, "session digest mismatch");
    }
    case MsgType::FilePut: {
      const auto path = r.str16();
      const auto digest = r.digest();
      const auto data = r.blob();
      r.finish();
      if (blake2b(data) != digest) return make_ack(Status::Protocol, "file digest mismatch");
      return make_ack(store_.put_file(path, data));
    }
    case MsgType::FileGet: {
      const auto path = r.str16();
      r.finish();
      auto data = store_.get_file(path);
      if (!data) return make_ack(Status::NotFound, "no file " + path);
      return BodyWriter().digest(blake2b(*data)).blob(*data).done(MsgType::Data);
    }
    case MsgType::FileDelete:
    case MsgType::MakeDir:
    case MsgType::RemoveDir: {
      const auto path = r.str16();
      r.finish();
      const auto s = request.type == MsgType::FileDelete ? store_.delete_file(path)
                     : request.type == MsgType::MakeDir  ? store_.make_dir(path)
                                                         : store_.remove_dir(path);
      return make_ack(s, s == Status::Ok ? std::string() : path + ": " + std::string(to_string(s)));
    }
    case MsgType::Stat: {
      const auto path = r.str16();
      r.finish();
      return encode_stat(store_.stat(path));
    }
    default:
      return make_ack(Status::Protocol,
                      "unknown message type " + std::to_string(static_cast<unsigned>(request.type)));
  }
}

InProcessDevice::InProcessDevice(CompactStore& store) : store_(store) {}

InProcessDevice::~InProcessDevice() { join(); }

void InProcessDevice::join() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mutex_);
    if (last_) last_->cut_now();
    threads.swap(threads_);
  }
  for (auto& t : threads) t.join();
}

std::function<std::unique_ptr<ByteChannel>()> InProcessDevice::connector() {
  return [this] {
    auto pipe = std::make_shared<PipeLink>();
    std::lock_guard lock(mutex_);
    if (last_) last_->cut_now();
    if (cut_) {
      pipe->cut_after(*cut_);
      cut_.reset();
    }
    last_ = pipe;
    std::shared_ptr<ByteChannel> device_end = pipe->end_b();
    threads_.emplace_back([this, device_end] {
      DeviceAgent agent(store_, std::chrono::seconds(30));
      agent.serve(*device_end);
    });
    return pipe->end_a();
  };
}

void InProcessDevice::cut_next_after(std::optional<std::uint64_t> total) {
  std::lock_guard lock(mutex_);
  cut_ = total;
}

std::shared_ptr<PipeLink> InProcessDevice::last_pipe() const {
  std::lock_guard lock(mutex_);
  return last_;
}

}  // namespace rfidtrace::sync
