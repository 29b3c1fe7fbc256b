import sys

import pygame


class StateManager:
    def __init__(self):
        self.score = 0  # Player score
        self.screen_width = 800  # Window width in pixels
        self.screen_height = 600  # Window height in pixels
        self.fps = 60  # Frames per second

state = StateManager()


def main():
    pygame.init()
    surface = pygame.display.set_mode((state.screen_width, state.screen_height))
    clock = pygame.time.Clock()
    running = True
    while running:
        for event in pygame.event.get():
            if event.type == pygame.QUIT:
                running = False
            pass
        pass
        surface.fill((0, 0, 0))
        pass
        pygame.display.flip()
        clock.tick(state.fps)
    pygame.quit()
    sys.exit(0)


if __name__ == "__main__":
    main()
