"""Two-paddle pong against a built-in tracking opponent.

The policy controls the right paddle ("Player"); the left paddle ("Enemy")
tracks the approaching ball at a capped speed, so well-angled returns can
beat it. The observation score is the point differential (player - enemy),
which is what the staged feedback bands are written against.
"""

from __future__ import annotations

from . import constants as C
from .base import ArcadeEnv, ObjectState, clamp, reflect_interval


def _zone_value(offset: float, edges, values, incoming: int) -> int:
    """Map a contact offset to an outgoing speed via the 5-zone paddle model."""
    for edge, value in zip(edges, values):
        if offset < edge:
            return incoming if value is None else value
    return values[-1]


class PongEnv(ArcadeEnv):
    ACTIONS = C.PONG_ACTIONS

    def _reset_state(self) -> None:
        self.lives = 0  # pong has no lives; score differential decides
        self.player_score = 0
        self.enemy_score = 0
        self.player_y = (C.PONG_PADDLE_MIN_Y + C.PONG_PADDLE_MAX_Y) // 2
        self.enemy_y = self.player_y
        self.player_dy = 0
        self.enemy_dy = 0
        self._serve(toward_player=self.rng.random() < 0.5, delay=0)

    def _serve(self, toward_player: bool, delay: int) -> None:
        self.serve_wait = delay
        self.ball_x = C.PONG_SERVE_X
        self.ball_y = self.rng.randint(*C.PONG_SERVE_Y_RANGE)
        self.ball_dx = C.PONG_BALL_SPEED_X if toward_player else -C.PONG_BALL_SPEED_X
        self.ball_dy = self.rng.choice(C.PONG_SERVE_DY)
        self.ball_visible = delay == 0

    def _advance(self, action: int) -> int:
        # Player paddle: action 2 steps toward smaller y, action 3 toward
        # larger y (matching the control contract the policies document).
        move = {0: 0, 2: -C.PONG_PADDLE_SPEED, 3: C.PONG_PADDLE_SPEED}[action]
        new_y = clamp(self.player_y + move, C.PONG_PADDLE_MIN_Y, C.PONG_PADDLE_MAX_Y)
        self.player_dy = new_y - self.player_y
        self.player_y = new_y

        # Enemy paddle: track the incoming ball, else drift to center.
        enemy_center = self.enemy_y + C.PONG_PADDLE_H // 2
        if self.ball_visible and self.ball_dx < 0:
            target = self.ball_y + C.PONG_BALL_H // 2
            speed = C.PONG_ENEMY_TRACK_SPEED
        else:
            target = (C.PONG_TOP + C.PONG_BOTTOM) // 2
            speed = C.PONG_ENEMY_IDLE_SPEED
        delta = clamp(target - enemy_center, -speed, speed)
        new_y = clamp(self.enemy_y + delta, C.PONG_PADDLE_MIN_Y, C.PONG_PADDLE_MAX_Y)
        self.enemy_dy = new_y - self.enemy_y
        self.enemy_y = new_y

        if not self.ball_visible:
            self.serve_wait -= 1
            if self.serve_wait <= 0:
                self.ball_visible = True
            return 0

        # Ball: vertical mirror reflection, then horizontal plane checks.
        x0 = self.ball_x
        dx = self.ball_dx
        y0, dy0 = self.ball_y, self.ball_dy
        self.ball_y, self.ball_dy = reflect_interval(y0, dy0, C.PONG_TOP, C.PONG_BOTTOM)
        x1 = x0 + dx

        hit_plane = None
        if dx > 0 and x0 < C.PONG_PLAYER_PLANE <= x1:
            hit_plane = C.PONG_PLAYER_PLANE
            paddle_y = self.player_y
        elif dx < 0 and x1 <= C.PONG_ENEMY_PLANE < x0:
            hit_plane = C.PONG_ENEMY_PLANE
            paddle_y = self.enemy_y
        if hit_plane is not None:
            t = (hit_plane - x0) / dx
            y_at = y0 + dy0 * t  # incoming line, before any fold
            y_at = _fold_float(y_at, C.PONG_TOP, C.PONG_BOTTOM)
            ball_c = y_at + C.PONG_BALL_H / 2
            paddle_lo = paddle_y - C.PONG_BALL_H  # touching counts
            paddle_hi = paddle_y + C.PONG_PADDLE_H
            if paddle_lo <= y_at <= paddle_hi:
                offset = ball_c - (paddle_y + C.PONG_PADDLE_H / 2)
                self.ball_dx = -dx
                self.ball_x = 2 * hit_plane - x1
                self.ball_dy = _zone_value(
                    offset, C.PONG_ZONE_EDGES, C.PONG_ZONE_DY, self.ball_dy
                )
                return 0
        self.ball_x = x1

        # Goals.
        if self.ball_x >= C.PONG_GOAL_RIGHT:
            self.enemy_score += 1
            reward = -1
            self._serve(toward_player=True, delay=C.PONG_SERVE_DELAY)
        elif self.ball_x <= C.PONG_GOAL_LEFT:
            self.player_score += 1
            reward = 1
            self._serve(toward_player=False, delay=C.PONG_SERVE_DELAY)
        else:
            return 0

        self.score = self.player_score - self.enemy_score
        if self.player_score >= C.PONG_WIN_SCORE or self.enemy_score >= C.PONG_WIN_SCORE:
            self.terminated = True
        return reward

    def _objects(self) -> dict[str, ObjectState]:
        objects = {
            "Player": ObjectState(
                x=C.PONG_PLAYER_X,
                y=self.player_y,
                w=C.PONG_PADDLE_W,
                h=C.PONG_PADDLE_H,
                dx=0,
                dy=self.player_dy,
            ),
            "Enemy": ObjectState(
                x=C.PONG_ENEMY_X,
                y=self.enemy_y,
                w=C.PONG_PADDLE_W,
                h=C.PONG_PADDLE_H,
                dx=0,
                dy=self.enemy_dy,
            ),
        }
        if self.ball_visible:
            objects["Ball"] = ObjectState(
                x=self.ball_x,
                y=self.ball_y,
                w=C.PONG_BALL_W,
                h=C.PONG_BALL_H,
                dx=self.ball_dx,
                dy=self.ball_dy,
            )
        return objects


def _fold_float(pos: float, low: float, high: float) -> float:
    for _ in range(8):
        if pos < low:
            pos = 2 * low - pos
        elif pos > high:
            pos = 2 * high - pos
        else:
            break
    return pos
