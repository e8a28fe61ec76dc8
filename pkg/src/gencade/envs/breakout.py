"""Brick-breaking with a bottom paddle, six brick rows, and five lives.

Bricks are labeled by row color group plus a zero-padded column index
("RB00".."RB17" for the top red row down to "BB00".."BB17"), so label order
equals left-to-right order within a row. Red/orange hits speed the ball up;
clearing the wall rebuilds it once, and clearing both walls wins at 864.
"""

from __future__ import annotations

from . import constants as C
from .base import ArcadeEnv, ObjectState, boxes_overlap, clamp, reflect_interval
from .pong import _fold_float, _zone_value


class BreakoutEnv(ArcadeEnv):
    ACTIONS = C.BREAKOUT_ACTIONS

    def _reset_state(self) -> None:
        self.lives = C.BREAKOUT_LIVES
        self.paddle_x = (C.BREAKOUT_PADDLE_MIN_X + C.BREAKOUT_PADDLE_MAX_X) // 2
        self.paddle_dx = 0
        self.walls_cleared = 0
        self._build_wall()
        self._serve(delay=0)

    def _build_wall(self) -> None:
        # label -> (ObjectState, points); states are immutable and cached.
        self.bricks: dict[str, tuple[ObjectState, int]] = {}
        for prefix, row_y, points in C.BREAKOUT_ROWS:
            for col in range(C.BREAKOUT_BRICK_COLS):
                label = f"{prefix}{col:02d}"
                state = ObjectState(
                    x=C.BREAKOUT_BRICK_X0 + col * C.BREAKOUT_BRICK_W,
                    y=row_y,
                    w=C.BREAKOUT_BRICK_W,
                    h=C.BREAKOUT_BRICK_H,
                )
                self.bricks[label] = (state, points)

    def _serve(self, delay: int) -> None:
        self.serve_wait = delay
        self.ball_visible = delay == 0
        self.ball_x = self.rng.randint(*C.BREAKOUT_SERVE_X_RANGE)
        self.ball_y = C.BREAKOUT_SERVE_Y
        self.ball_dx = self.rng.choice((-C.BREAKOUT_BALL_SPEED, C.BREAKOUT_BALL_SPEED))
        self.ball_dy = C.BREAKOUT_BALL_SPEED
        self.speed = C.BREAKOUT_BALL_SPEED

    def _advance(self, action: int) -> int:
        move = {0: 0, 2: C.BREAKOUT_PADDLE_SPEED, 3: -C.BREAKOUT_PADDLE_SPEED}[action]
        new_x = clamp(self.paddle_x + move, C.BREAKOUT_PADDLE_MIN_X, C.BREAKOUT_PADDLE_MAX_X)
        self.paddle_dx = new_x - self.paddle_x
        self.paddle_x = new_x

        if not self.ball_visible:
            self.serve_wait -= 1
            if self.serve_wait <= 0:
                self.ball_visible = True
            return 0

        x0, y0 = self.ball_x, self.ball_y
        dx0, dy0 = self.ball_dx, self.ball_dy

        # Horizontal wall reflection, vertical ceiling reflection.
        self.ball_x, self.ball_dx = reflect_interval(
            x0, dx0, C.BREAKOUT_WALL_LEFT, C.BREAKOUT_WALL_RIGHT
        )
        y1 = y0 + dy0
        if y1 < C.BREAKOUT_CEILING:
            y1 = 2 * C.BREAKOUT_CEILING - y1
            dy_new = -dy0
        else:
            dy_new = dy0
        self.ball_y, self.ball_dy = y1, dy_new

        # Paddle contact: the ball crosses the paddle plane moving down.
        if dy0 > 0 and y0 < C.BREAKOUT_PADDLE_PLANE <= y1:
            t = (C.BREAKOUT_PADDLE_PLANE - y0) / dy0
            x_at = _fold_float(x0 + dx0 * t, C.BREAKOUT_WALL_LEFT, C.BREAKOUT_WALL_RIGHT)
            ball_c = x_at + C.BREAKOUT_BALL_W / 2
            if self.paddle_x - C.BREAKOUT_BALL_W <= x_at <= self.paddle_x + C.BREAKOUT_PADDLE_W:
                offset = ball_c - (self.paddle_x + C.BREAKOUT_PADDLE_W / 2)
                self.ball_y = 2 * C.BREAKOUT_PADDLE_PLANE - y1
                self.ball_dy = -self.speed
                out_dx = _zone_value(
                    offset, C.BREAKOUT_ZONE_EDGES, C.BREAKOUT_ZONE_DX, self.ball_dx
                )
                self.ball_dx = out_dx
                return 0

        # Lost ball.
        if self.ball_y >= C.BREAKOUT_LOSS_Y:
            self.lives -= 1
            if self.lives <= 0:
                self.terminated = True
                self.ball_visible = False
                return 0
            self._serve(delay=C.BREAKOUT_SERVE_DELAY)
            return 0

        # Brick contact: at most one brick per step, lowest-then-leftmost.
        hit_label = None
        for label in self.bricks:
            state, _ = self.bricks[label]
            if boxes_overlap(
                self.ball_x, self.ball_y, C.BREAKOUT_BALL_W, C.BREAKOUT_BALL_H,
                state.x, state.y, state.w, state.h,
            ):
                if hit_label is None:
                    hit_label = label
                else:
                    best = self.bricks[hit_label][0]
                    if (-state.y, state.x) < (-best.y, best.x):
                        hit_label = label
        if hit_label is None:
            return 0

        state, points = self.bricks.pop(hit_label)
        if hit_label[:2] in C.BREAKOUT_SPEEDUP_LABELS:
            self.speed = C.BREAKOUT_BALL_SPEED_FAST
        # Reflect vertically off the brick and push the ball clear of it.
        if self.ball_dy > 0:
            self.ball_y = state.y - C.BREAKOUT_BALL_H
        else:
            self.ball_y = state.y + state.h
        sign = -1 if self.ball_dy > 0 else 1
        self.ball_dy = sign * self.speed
        self.score += points

        if not self.bricks:
            if self.walls_cleared == 0:
                self.walls_cleared = 1
                self._build_wall()
            else:
                self.terminated = True
        if self.score >= C.BREAKOUT_WIN_SCORE:
            self.terminated = True
        return points

    def _objects(self) -> dict[str, ObjectState]:
        objects = {
            "Player": ObjectState(
                x=self.paddle_x,
                y=C.BREAKOUT_PADDLE_Y,
                w=C.BREAKOUT_PADDLE_W,
                h=C.BREAKOUT_PADDLE_H,
                dx=self.paddle_dx,
                dy=0,
            )
        }
        if self.ball_visible:
            objects["Ball"] = ObjectState(
                x=self.ball_x,
                y=self.ball_y,
                w=C.BREAKOUT_BALL_W,
                h=C.BREAKOUT_BALL_H,
                dx=self.ball_dx,
                dy=self.ball_dy,
            )
        for label, (state, _) in self.bricks.items():
            objects[label] = state
        return objects
