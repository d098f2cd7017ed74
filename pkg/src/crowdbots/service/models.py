"""Wire protocol message schemas.

Every message carries a protocol version `v` and a `type` discriminator.
Server to client: frame, panel, chat_echo, error. Client to server: chat.
"""

from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field

PROTOCOL_VERSION = 1


class ChatSubmit(BaseModel):
    v: int = PROTOCOL_VERSION
    type: Literal["chat"] = "chat"
    username: str = Field(min_length=1, max_length=64)
    text: str = Field(min_length=1, max_length=500)


class Ack(BaseModel):
    v: int = PROTOCOL_VERSION
    type: Literal["ack"] = "ack"
    accepted: bool
    parsed_as: str  # reinforcement | command_vote | other


class ChatEcho(BaseModel):
    v: int = PROTOCOL_VERSION
    type: Literal["chat_echo"] = "chat_echo"
    username: str
    text: str


class RobotPanel(BaseModel):
    robot_id: int
    species: str
    age_ticks: int
    color: str
    yes: int
    no: int
    likes: int
    dislikes: int


class CommandPanel(BaseModel):
    text: str
    code: float
    seconds_remaining: float


class CommandScore(BaseModel):
    text: str
    score: float


class UserPoints(BaseModel):
    username: str
    points: int


class PanelUpdate(BaseModel):
    v: int = PROTOCOL_VERSION
    type: Literal["panel"] = "panel"
    tick: int
    robot: Optional[RobotPanel] = None
    command: CommandPanel
    top_commands: List[CommandScore]
    top_users: List[UserPoints]
    last_user: Optional[str] = None


class FrameUpdate(BaseModel):
    v: int = PROTOCOL_VERSION
    type: Literal["frame"] = "frame"
    tick: int
    eval_id: int
    robot_id: int
    species: str
    color: str
    step: int
    joint_angles: List[float]
    segment_endpoints: List[List[List[float]]]  # (segment, end, xyz)


class ErrorReply(BaseModel):
    v: int = PROTOCOL_VERSION
    type: Literal["error"] = "error"
    detail: str


PROTOCOL_DOC = {
    "version": PROTOCOL_VERSION,
    "transport": "websocket /v1/ws (JSON text frames) plus REST mirrors",
    "server_to_client": {
        "panel": PanelUpdate.model_json_schema(),
        "frame": FrameUpdate.model_json_schema(),
        "chat_echo": ChatEcho.model_json_schema(),
        "error": ErrorReply.model_json_schema(),
    },
    "client_to_server": {"chat": ChatSubmit.model_json_schema()},
    "colors": ["red", "green", "blue", "orange", "cyan", "purple", "silver"],
    "notes": [
        "a panel snapshot is always the first message after connect",
        "frames are throttled and may be dropped for slow consumers",
        "reinforcement grammar: '!' + color initial + one of y/n/l/d",
    ],
}
