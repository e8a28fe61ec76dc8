"""Physics and scoring constants for the built-in games, in one place.

Velocities are per env step, i.e. with the 4-frame action repeat already
folded in. Positions are top-left corners on the 160x210 screen; y grows
downward.
"""

# --------------------------------------------------------------------------
# Pong

PONG_ACTIONS = frozenset([0, 2, 3])  # 0 noop, 2 steps y-, 3 steps y+
PONG_TOP = 30  # ball y reflects here
PONG_BOTTOM = 190
PONG_PLAYER_X = 140  # right-side paddle, controlled by the policy
PONG_ENEMY_X = 16  # left-side paddle, built-in opponent
PONG_PADDLE_W = 4
PONG_PADDLE_H = 16
PONG_PADDLE_SPEED = 4
PONG_PADDLE_MIN_Y = PONG_TOP
PONG_PADDLE_MAX_Y = PONG_BOTTOM - PONG_PADDLE_H
PONG_BALL_W = 2
PONG_BALL_H = 4
PONG_BALL_SPEED_X = 4
PONG_PLAYER_PLANE = PONG_PLAYER_X  # ball x at player-paddle contact
PONG_ENEMY_PLANE = PONG_ENEMY_X + PONG_PADDLE_W  # ball x at enemy contact
PONG_GOAL_RIGHT = 160 - PONG_BALL_W  # past the player
PONG_GOAL_LEFT = 0  # past the enemy
PONG_SERVE_X = 78
PONG_SERVE_Y_RANGE = (60, 150)
PONG_SERVE_DELAY = 2  # steps without a ball after each point
PONG_SERVE_DY = (-3, 3)
# Contact zones: ball-center offset from paddle center -> outgoing dy.
# The middle zone keeps the incoming vertical speed (flat reflection).
PONG_ZONE_EDGES = (-6, -2, 2, 6)
PONG_ZONE_DY = (-6, -3, None, 3, 6)  # None = keep incoming dy
PONG_ENEMY_TRACK_SPEED = 2  # < max |dy|, so angled shots can beat it
PONG_ENEMY_IDLE_SPEED = 2
PONG_WIN_SCORE = 21

# --------------------------------------------------------------------------
# Breakout

BREAKOUT_ACTIONS = frozenset([0, 2, 3])  # 0 noop, 2 right, 3 left
BREAKOUT_WALL_LEFT = 9  # ball x reflects at the side walls
BREAKOUT_WALL_RIGHT = 152
BREAKOUT_CEILING = 30
BREAKOUT_BRICK_W = 8
BREAKOUT_BRICK_H = 6
BREAKOUT_BRICK_COLS = 18
BREAKOUT_BRICK_X0 = 9
# Rows listed top-to-bottom with their per-brick point values and labels.
BREAKOUT_ROWS = (
    ("RB", 57, 7),
    ("OB", 63, 7),
    ("YB", 69, 4),
    ("GB", 75, 4),
    ("AB", 81, 1),
    ("BB", 87, 1),
)
BREAKOUT_WALL_POINTS = 432  # 18 * (7+7+4+4+1+1)
BREAKOUT_WIN_SCORE = 864  # two full walls
BREAKOUT_PADDLE_Y = 189
BREAKOUT_PADDLE_W = 16
BREAKOUT_PADDLE_H = 4
BREAKOUT_PADDLE_SPEED = 6
BREAKOUT_PADDLE_MIN_X = BREAKOUT_WALL_LEFT
BREAKOUT_PADDLE_MAX_X = BREAKOUT_WALL_RIGHT - BREAKOUT_PADDLE_W + 2
BREAKOUT_BALL_W = 2
BREAKOUT_BALL_H = 4
BREAKOUT_BALL_SPEED = 4  # |dy| until a red/orange brick is hit
BREAKOUT_BALL_SPEED_FAST = 6
BREAKOUT_SPEEDUP_LABELS = ("RB", "OB")
BREAKOUT_PADDLE_PLANE = BREAKOUT_PADDLE_Y  # ball y at paddle contact
BREAKOUT_LOSS_Y = 200  # ball y past this without contact loses a life
BREAKOUT_SERVE_DELAY = 2
BREAKOUT_SERVE_Y = 120
BREAKOUT_SERVE_X_RANGE = (40, 120)
# Contact zones: ball-center offset from paddle center -> outgoing dx.
BREAKOUT_ZONE_EDGES = (-6, -2, 2, 6)
BREAKOUT_ZONE_DX = (-6, -4, None, 4, 6)  # None = keep incoming dx
BREAKOUT_LIVES = 5

# --------------------------------------------------------------------------
# Space Invaders

SI_ACTIONS = frozenset([0, 1, 2, 3, 4, 5])
# 0 noop, 1 fire, 2 right, 3 left, 4 right+fire, 5 left+fire
SI_PLAYER_Y = 185
SI_PLAYER_W = 8
SI_PLAYER_H = 10
SI_PLAYER_SPEED = 3
SI_PLAYER_MIN_X = 4
SI_PLAYER_MAX_X = 152  # flush with the right screen edge (w=8)
SI_GRID_ROWS = 6
SI_GRID_COLS = 6
SI_GRID_X0 = 20
SI_GRID_Y0 = 32
SI_GRID_DX = 16  # horizontal spacing between alien columns
SI_GRID_DY = 12  # vertical spacing between alien rows
SI_ALIEN_W = 10
SI_ALIEN_H = 8
SI_MARCH_SPEED = 1  # horizontal px per step
SI_DESCEND_STEP = 4  # vertical drop when the grid reverses at an edge
SI_MARCH_MIN_X = 4
SI_MARCH_MAX_X = 148  # grid reverses when any alien would pass this
SI_ROW_POINTS = (30, 25, 20, 15, 10, 5)  # top row scores most
SI_PLAYER_BULLET_SPEED = -12  # negative dy: travels up
SI_ALIEN_BULLET_SPEED = 5
SI_BULLET_W = 1
SI_BULLET_H = 4
SI_FIRE_COOLDOWN = 4  # steps between player shots
SI_MAX_ALIEN_BULLETS = 1  # sparse fire leaves gaps the player can exploit
SI_ALIEN_FIRE_PROB = 0.15  # per step, from a random bottom-most alien
SI_SHIELD_XS = (32, 72, 112)
SI_SHIELD_Y = 157
SI_SHIELD_W = 16
SI_SHIELD_H = 8
SI_SHIELD_HP = 4
SI_INVASION_Y = SI_PLAYER_Y  # aliens reaching the player row end the game
SI_LIVES = 3
