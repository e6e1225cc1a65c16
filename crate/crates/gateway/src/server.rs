//! Live WebSocket service. One task owns the instrument and advances it at a
//! paced rate; connections only parse, queue and forward.
//!
//! A command is acknowledged once the instrument has taken it, with the tick
//! it was queued at. It runs in the main-loop iteration at that tick, so the
//! first Snapshot with a later tick reflects it.

use crate::session::LiveSession;
use crate::wire::{parse_client, ClientCommand, WireMessage};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use miniscope_core::Scope;
use std::sync::Arc;
use std::time::Duration;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot, watch};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServeOptions {
    /// Wall-clock time per main-loop iteration.
    pub loop_interval: Duration,
}

impl ServeOptions {
    /// Run at `fraction` of real time for `scope`'s clock.
    pub fn paced(scope: &Scope, fraction: f64) -> Self {
        let secs = scope.hardware().adc.seconds(scope.loop_ticks()) / fraction;
        Self { loop_interval: Duration::from_secs_f64(secs) }
    }
}

/// A queued command and where to report the tick it was queued at.
type Queued = (ClientCommand, oneshot::Sender<u64>);

#[derive(Clone)]
struct Shared {
    commands: mpsc::UnboundedSender<Queued>,
    snapshots: broadcast::Sender<Arc<str>>,
    latest: watch::Receiver<Arc<str>>,
}

pub fn router(scope: Scope, opts: ServeOptions) -> Router {
    let mut session = LiveSession::new(scope);
    let first: Arc<str> = WireMessage::snapshot(&session.snapshot()).to_json().into();
    let (cmd_tx, mut cmd_rx) = mpsc::unbounded_channel::<Queued>();
    let (snap_tx, _) = broadcast::channel::<Arc<str>>(1024);
    let (latest_tx, latest_rx) = watch::channel(first);
    let sim_tx = snap_tx.clone();
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(opts.loop_interval);
        interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            interval.tick().await;
            let mut replies = Vec::new();
            loop {
                match cmd_rx.try_recv() {
                    Ok((cmd, reply)) => {
                        session.apply(&cmd);
                        replies.push(reply);
                    }
                    Err(mpsc::error::TryRecvError::Empty) => break,
                    Err(mpsc::error::TryRecvError::Disconnected) => return,
                }
            }
            let queued_at = session.scope().now();
            if let Some(snap) = session.step() {
                let msg: Arc<str> = WireMessage::snapshot(&snap).to_json().into();
                // Watch first: a connection that reads it after subscribing
                // cannot miss a broadcast.
                let _ = latest_tx.send(msg.clone());
                let _ = sim_tx.send(msg);
            }
            for reply in replies {
                let _ = reply.send(queued_at);
            }
        }
    });
    let shared = Shared { commands: cmd_tx, snapshots: snap_tx, latest: latest_rx };
    Router::new().route("/ws", get(upgrade)).with_state(shared)
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Shared>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, shared))
}

async fn connection(socket: WebSocket, shared: Shared) {
    let mut rx = shared.snapshots.subscribe();
    let (mut sink, mut stream) = socket.split();
    let mut last_sent = shared.latest.borrow().clone();
    if sink.send(Message::Text(last_sent.as_ref().into())).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            incoming = stream.next() => {
                let reply = match incoming {
                    Some(Ok(Message::Text(text))) => match parse_client(text.as_str()) {
                        Ok(cmd) => {
                            let kind = cmd.kind();
                            let (tx, rx) = oneshot::channel();
                            if shared.commands.send((cmd, tx)).is_err() {
                                return;
                            }
                            match rx.await {
                                Ok(tick) => WireMessage::ack(kind, tick),
                                Err(_) => return,
                            }
                        }
                        Err(reason) => WireMessage::error(reason),
                    },
                    Some(Ok(Message::Binary(_))) => WireMessage::error("malformed message: expected text"),
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(_)) => continue,
                };
                if sink.send(Message::Text(reply.to_json().into())).await.is_err() {
                    return;
                }
            }
            snap = rx.recv() => match snap {
                Ok(msg) if Arc::ptr_eq(&msg, &last_sent) => continue,
                Ok(msg) => {
                    if sink.send(Message::Text(msg.as_ref().into())).await.is_err() {
                        return;
                    }
                    last_sent = msg;
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return,
            },
        }
    }
}

/// Serve `/ws` on `listener` until the process ends.
pub async fn serve(listener: TcpListener, scope: Scope, opts: ServeOptions) -> std::io::Result<()> {
    axum::serve(listener, router(scope, opts)).await
}
