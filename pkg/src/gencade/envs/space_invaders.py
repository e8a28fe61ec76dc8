"""Marching alien grid, one player bullet at a time, shields, three lives.

Aliens are labeled "Alien00".."Alien35" row-major from the top-left of the
6x6 grid; destroyed aliens keep their label off the board. The player bullet
is "Bullet0" (dy < 0); alien bullets occupy slots from "Bullet1" up (dy > 0).
Clearing the grid spawns a fresh wave; aliens reaching the player row end
the episode.
"""

from __future__ import annotations

from . import constants as C
from .base import ArcadeEnv, ObjectState, boxes_overlap, clamp


class SpaceInvadersEnv(ArcadeEnv):
    ACTIONS = C.SI_ACTIONS

    def _reset_state(self) -> None:
        self.lives = C.SI_LIVES
        self.player_x = (C.SI_PLAYER_MIN_X + C.SI_PLAYER_MAX_X) // 2
        self.player_dx = 0
        self.cooldown = 0
        self.player_bullet: tuple[int, int] | None = None  # (x, y)
        self.alien_bullets: dict[str, tuple[int, int]] = {}
        self.shields = {f"Shield{i}": [x, C.SI_SHIELD_HP] for i, x in enumerate(C.SI_SHIELD_XS)}
        self._spawn_wave()

    def _spawn_wave(self) -> None:
        # alien label -> (col, row); positions derive from the grid origin.
        self.aliens: dict[str, tuple[int, int]] = {}
        for row in range(C.SI_GRID_ROWS):
            for col in range(C.SI_GRID_COLS):
                self.aliens[f"Alien{row * C.SI_GRID_COLS + col:02d}"] = (col, row)
        self.grid_x = C.SI_GRID_X0
        self.grid_y = C.SI_GRID_Y0
        self.march_dir = 1
        self.grid_dx = 0
        self.grid_dy = 0

    def _alien_state(self, col: int, row: int) -> ObjectState:
        return ObjectState(
            x=self.grid_x + col * C.SI_GRID_DX,
            y=self.grid_y + row * C.SI_GRID_DY,
            w=C.SI_ALIEN_W,
            h=C.SI_ALIEN_H,
            dx=self.grid_dx,
            dy=self.grid_dy,
        )

    def _advance(self, action: int) -> int:
        reward = 0

        # Player movement and firing (4/5 combine a move with fire).
        move = {0: 0, 1: 0, 2: 1, 3: -1, 4: 1, 5: -1}[action]
        fire = action in (1, 4, 5)
        new_x = clamp(
            self.player_x + move * C.SI_PLAYER_SPEED, C.SI_PLAYER_MIN_X, C.SI_PLAYER_MAX_X
        )
        self.player_dx = new_x - self.player_x
        self.player_x = new_x
        if self.cooldown > 0:
            self.cooldown -= 1
        if fire and self.player_bullet is None and self.cooldown == 0:
            self.player_bullet = (
                self.player_x + C.SI_PLAYER_W // 2,
                C.SI_PLAYER_Y - C.SI_BULLET_H,
            )
            self.cooldown = C.SI_FIRE_COOLDOWN

        # March the grid; reverse and descend at the edges.
        cols = [c for c, _ in self.aliens.values()]
        self.grid_dx, self.grid_dy = 0, 0
        if cols:
            min_x = self.grid_x + min(cols) * C.SI_GRID_DX
            max_x = self.grid_x + max(cols) * C.SI_GRID_DX + C.SI_ALIEN_W
            step = self.march_dir * C.SI_MARCH_SPEED
            if (self.march_dir > 0 and max_x + step > C.SI_MARCH_MAX_X) or (
                self.march_dir < 0 and min_x + step < C.SI_MARCH_MIN_X
            ):
                self.grid_y += C.SI_DESCEND_STEP
                self.grid_dy = C.SI_DESCEND_STEP
                self.march_dir = -self.march_dir
            else:
                self.grid_x += step
                self.grid_dx = step

        # Move bullets.
        if self.player_bullet is not None:
            bx, by = self.player_bullet
            by += C.SI_PLAYER_BULLET_SPEED
            self.player_bullet = None if by + C.SI_BULLET_H < 0 else (bx, by)
        for slot in list(self.alien_bullets):
            bx, by = self.alien_bullets[slot]
            by += C.SI_ALIEN_BULLET_SPEED
            if by > 210:
                del self.alien_bullets[slot]
            else:
                self.alien_bullets[slot] = (bx, by)

        # Player bullet hits: own shields absorb it first (firing from
        # under a shield wastes the shot, as in the classic game).
        if self.player_bullet is not None:
            bx, by = self.player_bullet
            if self._shield_absorbs(bx, by):
                self.player_bullet = None
        if self.player_bullet is not None:
            bx, by = self.player_bullet
            hit = None
            for label, (col, row) in self.aliens.items():
                state = self._alien_state(col, row)
                if boxes_overlap(
                    bx, by, C.SI_BULLET_W, C.SI_BULLET_H, state.x, state.y, state.w, state.h
                ):
                    if hit is None or row > hit[2]:
                        hit = (label, col, row)
            if hit is not None:
                label, _, row = hit
                del self.aliens[label]
                points = C.SI_ROW_POINTS[row]
                self.score += points
                reward += points
                self.player_bullet = None
                if not self.aliens:
                    self._spawn_wave()

        # Alien fire, from the bottom-most alien of a random column.
        if (
            self.aliens
            and len(self.alien_bullets) < C.SI_MAX_ALIEN_BULLETS
            and self.rng.random() < C.SI_ALIEN_FIRE_PROB
        ):
            bottoms: dict[int, int] = {}
            for col, row in self.aliens.values():
                bottoms[col] = max(bottoms.get(col, -1), row)
            col = self.rng.choice(sorted(bottoms))
            row = bottoms[col]
            state = self._alien_state(col, row)
            for slot_index in range(1, C.SI_MAX_ALIEN_BULLETS + 1):
                slot = f"Bullet{slot_index}"
                if slot not in self.alien_bullets:
                    self.alien_bullets[slot] = (
                        state.x + C.SI_ALIEN_W // 2,
                        state.y + C.SI_ALIEN_H,
                    )
                    break

        # Alien bullets vs shields and the player.
        for slot in list(self.alien_bullets):
            bx, by = self.alien_bullets[slot]
            if self._shield_absorbs(bx, by):
                del self.alien_bullets[slot]
                continue
            if boxes_overlap(
                bx, by, C.SI_BULLET_W, C.SI_BULLET_H,
                self.player_x, C.SI_PLAYER_Y, C.SI_PLAYER_W, C.SI_PLAYER_H,
            ):
                del self.alien_bullets[slot]
                self.lives -= 1
                if self.lives <= 0:
                    self.terminated = True
                    return reward

        # Aliens crushing shields or reaching the player row.
        for label, (col, row) in self.aliens.items():
            state = self._alien_state(col, row)
            for shield_label in list(self.shields):
                sx, _hp = self.shields[shield_label]
                if boxes_overlap(
                    state.x, state.y, state.w, state.h,
                    sx, C.SI_SHIELD_Y, C.SI_SHIELD_W, C.SI_SHIELD_H,
                ):
                    del self.shields[shield_label]
            if state.y + state.h >= C.SI_INVASION_Y:
                self.terminated = True
                return reward
        return reward

    def _shield_absorbs(self, bx: int, by: int) -> bool:
        for label in list(self.shields):
            sx, hp = self.shields[label]
            if boxes_overlap(
                bx, by, C.SI_BULLET_W, C.SI_BULLET_H, sx, C.SI_SHIELD_Y, C.SI_SHIELD_W, C.SI_SHIELD_H
            ):
                hp -= 1
                if hp <= 0:
                    del self.shields[label]
                else:
                    self.shields[label][1] = hp
                return True
        return False

    def _objects(self) -> dict[str, ObjectState]:
        objects = {
            "Player": ObjectState(
                x=self.player_x,
                y=C.SI_PLAYER_Y,
                w=C.SI_PLAYER_W,
                h=C.SI_PLAYER_H,
                dx=self.player_dx,
                dy=0,
            )
        }
        for label, (col, row) in self.aliens.items():
            objects[label] = self._alien_state(col, row)
        for label, (sx, _hp) in self.shields.items():
            objects[label] = ObjectState(
                x=sx, y=C.SI_SHIELD_Y, w=C.SI_SHIELD_W, h=C.SI_SHIELD_H
            )
        if self.player_bullet is not None:
            bx, by = self.player_bullet
            objects["Bullet0"] = ObjectState(
                x=bx, y=by, w=C.SI_BULLET_W, h=C.SI_BULLET_H, dx=0, dy=C.SI_PLAYER_BULLET_SPEED
            )
        for slot, (bx, by) in self.alien_bullets.items():
            objects[slot] = ObjectState(
                x=bx, y=by, w=C.SI_BULLET_W, h=C.SI_BULLET_H, dx=0, dy=C.SI_ALIEN_BULLET_SPEED
            )
        return objects
